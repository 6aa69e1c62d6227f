import pytest

from plots.cli import main

from _csvgen import RESULT_HEADER, result_line, trace_line, write_results, \
    write_trace


def test_run_each_kind(tmp_path, capsys):
    sweep = write_results(tmp_path / "s.csv", [
        result_line(value=v, seed=t, se=1 + v + 0.1 * t)
        for v in (0.0, 1.0) for t in range(2)
    ])
    trace = write_trace(tmp_path / "t.csv",
                        [trace_line(iteration=i) for i in (1, 2)])
    for kind, src in (("metric_vs_axis", sweep), ("dual_axis_se_ee", sweep),
                      ("convergence", trace)):
        out = tmp_path / f"{kind}.png"
        assert main([kind, "--in", str(src), "--out", str(out)]) == 0
        assert out.exists()
        assert str(out) in capsys.readouterr().out


def test_missing_column_fails_descriptively(tmp_path, capsys):
    path = tmp_path / "broken.csv"
    path.write_text(RESULT_HEADER.replace("ee_bps_hz_w,", "") + "\n"
                    + "kappa,0.5,ARIS,7,0.2,0.2,5.0,0.0,8,12.5,false\n")
    code = main(["dual_axis_se_ee", "--in", str(path),
                 "--out", str(tmp_path / "x.png")])
    err = capsys.readouterr().err
    assert code == 2
    assert "missing required columns" in err and "ee_bps_hz_w" in err


def test_nonexistent_input_fails(tmp_path, capsys):
    code = main(["convergence", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "nope.csv" in capsys.readouterr().err


def test_unknown_kind_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exit_info:
        main(["scatter3d", "--in", "a.csv", "--out", "b.png"])
    assert exit_info.value.code == 2


def test_bad_metric_fails(tmp_path, capsys):
    sweep = write_results(tmp_path / "s.csv", [result_line()])
    code = main(["metric_vs_axis", "--in", str(sweep), "--metric", "seed",
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "unknown metric" in capsys.readouterr().err
