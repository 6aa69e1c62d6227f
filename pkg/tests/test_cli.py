import pytest

from cfris.cli import main
from cfris.config import desk_config, save_config
from cfris.harness import CSV_HEADER


def rows_without_wall_clock(path, column):
    lines = path.read_text().strip().split("\n")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        del parts[column]
        out.append(parts)
    return lines[0], out


def test_run_writes_deterministic_outputs(tmp_path, capsys):
    args = ["run", "--profile", "desk", "--seed", "3", "--out"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + [str(a)]) == 0
    assert main(args + [str(b)]) == 0
    header_a, rows_a = rows_without_wall_clock(a, 10)
    header_b, rows_b = rows_without_wall_clock(b, 10)
    assert header_a == CSV_HEADER
    assert rows_a == rows_b

    trace_a, _ = rows_without_wall_clock(tmp_path / "a_trace.csv", 8)
    rows_ta = rows_without_wall_clock(tmp_path / "a_trace.csv", 8)[1]
    rows_tb = rows_without_wall_clock(tmp_path / "b_trace.csv", 8)[1]
    assert trace_a.startswith("iteration,objective")
    assert rows_ta == rows_tb

    out = capsys.readouterr().out
    assert "RESULT verb=run" in out
    assert "config:" in out


def test_run_applies_overrides(tmp_path, capsys):
    code = main(["run", "--seed", "1", "--set", "kappa=0.25",
                 "--dac-bits", "2", "--pmax-dbm", "30"])
    assert code == 0
    out = capsys.readouterr().out
    assert "kappa=0.25" in out
    assert "bits_per_ap=[2, 2]" in out
    assert "p_ap_max=[1.0, 1.0]" in out


def test_run_reads_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "scenario.cfg"
    save_config(desk_config().replace(kappa=0.75), cfg_path)
    assert main(["run", "--config", str(cfg_path), "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert "kappa=0.75" in out


def test_sweep_produces_csv_and_result_lines(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code = main(["sweep", "--axis", "kappa", "--values", "0.0,1.0",
                 "--methods", "ARIS", "--trials", "1", "--out", str(out_path)])
    assert code == 0
    lines = out_path.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    out = capsys.readouterr().out
    assert out.count("RESULT verb=sweep") == 2
    assert "2 rows (2 values x 1 methods x 1 trials)" in out


def test_trace_exports_history(tmp_path, capsys):
    out_path = tmp_path / "trace.csv"
    assert main(["trace", "--seed", "4", "--out", str(out_path)]) == 0
    lines = out_path.read_text().strip().split("\n")
    assert lines[0].startswith("iteration,objective,se,ee,tau")
    assert len(lines) >= 2
    out = capsys.readouterr().out
    assert "RESULT verb=trace" in out


def test_bad_arguments_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--methods", "MRT"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--axis", "bogus", "--values", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--set", "kappa=not-a-number"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--axis", "kappa", "--values", "0.5,oops"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(tmp_path / "missing.cfg")])
    assert exc.value.code == 2


def test_unknown_verb_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
