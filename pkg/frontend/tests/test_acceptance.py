"""Acceptance for the plotting side: every figure kind renders from the
CSVs shipped with the simulator, and schema violations fail loudly."""

from pathlib import Path

from plots.cli import main
from plots.figures import FIGURE_KINDS, FigureSpec, render

DATA_DIR = Path(__file__).resolve().parents[2] / "data"


def test_a11_plot_pipeline(tmp_path, capsys):
    kappa = DATA_DIR / "desk_kappa_sweep.csv"
    bits = DATA_DIR / "desk_dac_bits_sweep.csv"
    trace = DATA_DIR / "desk_convergence_trace.csv"
    specs = [
        FigureSpec("metric_vs_axis", (bits,), str(tmp_path / "bits_se.png")),
        FigureSpec("metric_vs_axis", (bits,), str(tmp_path / "bits_ee.png"),
                   metric="ee_bps_hz_w"),
        FigureSpec("dual_axis_se_ee", (kappa,), str(tmp_path / "kappa.png")),
        FigureSpec("convergence", (trace,), str(tmp_path / "conv.png")),
    ]
    rendered = []
    for spec in specs:
        out = render(spec)
        rendered.append(out.exists() and out.stat().st_size > 1000)
    kinds_covered = {s.kind for s in specs} == set(FIGURE_KINDS)

    broken = tmp_path / "broken.csv"
    text = kappa.read_text().splitlines()
    header = text[0].split(",")
    drop = header.index("se_bps_hz")
    rewritten = [",".join(parts.split(",")[:drop] + parts.split(",")[drop + 1:])
                 for parts in text]
    broken.write_text("\n".join(rewritten) + "\n")
    code = main(["dual_axis_se_ee", "--in", str(broken),
                 "--out", str(tmp_path / "broken.png")])
    err = capsys.readouterr().err
    descriptive = code == 2 and "missing required columns" in err \
        and "se_bps_hz" in err

    ok = all(rendered) and kinds_covered and descriptive
    print(f"A11 plot-pipeline: {'PASS' if ok else 'FAIL'} "
          f"({len(specs)} figures rendered from shipped CSVs, "
          f"missing-column exit code {code})")
    assert ok
