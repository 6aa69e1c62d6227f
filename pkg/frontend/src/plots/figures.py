"""Render figures from harness CSVs: sweep curves and convergence traces.

Sweep figures draw one series per group (method by default), the mean over
trials as a line and the min-max range as a shaded band. Power axes are
converted to dBm at render time; the CSVs stay in watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .reader import SchemaError, load_results, load_trace  # noqa: E402

FIGURE_KINDS = ("metric_vs_axis", "dual_axis_se_ee", "convergence")

METRIC_LABELS = {
    "se_bps_hz": "SE (bit/s/Hz)",
    "ee_bps_hz_w": "EE (bit/s/Hz/W)",
    "objective": "objective",
    "p_sys_w": "system power (W)",
}

TRACE_LABELS = {
    "objective": "objective",
    "se": "SE (bit/s/Hz)",
    "ee": "EE (bit/s/Hz/W)",
    "tau": "auxiliary variable",
    "max_residual": "max constraint residual",
}

GROUP_COLUMNS = ("method", "seed", "feasible")

# sweep axes whose values are watts in the CSV but read better in dBm
POWER_AXES = ("p_ap_max", "p_ris_max")

AXIS_LABELS = {
    "kappa": "tradeoff weight",
    "dac_bits": "DAC resolution (bits)",
    "p_ap_max": "per-AP power limit (dBm)",
    "p_ris_max": "per-RIS power limit (dBm)",
    "n_ris_elements": "elements per surface",
    "n_ris": "number of surfaces",
    "min_rate": "rate floor (bit/s/Hz)",
}


@dataclass(frozen=True)
class FigureSpec:
    """One figure: input file(s), kind, grouping, and output path."""

    kind: str
    inputs: tuple
    out_path: str
    metric: str = ""
    group_by: str = "method"
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected "
                             f"one of {FIGURE_KINDS}")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.group_by not in GROUP_COLUMNS:
            raise ValueError(f"cannot group by {self.group_by!r}; expected "
                             f"one of {GROUP_COLUMNS}")
        metric = self.metric or self.default_metric()
        object.__setattr__(self, "metric", metric)
        table = TRACE_LABELS if self.kind == "convergence" else METRIC_LABELS
        if metric not in table:
            raise ValueError(f"unknown metric {metric!r} for {self.kind}; "
                             f"expected one of {tuple(table)}")

    def default_metric(self) -> str:
        return "objective" if self.kind == "convergence" else "se_bps_hz"


def to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts * 1e3)


def axis_label(axis: str) -> str:
    return AXIS_LABELS.get(axis, axis)


def series_from_rows(rows, metric: str, group_by: str = "method"):
    """Aggregate sweep rows into per-group (x, mean, lo, hi) series.

    Non-finite metric values (failed trials) are dropped before averaging.
    Groups and x values come out sorted so identical input always produces
    identical series.
    """
    buckets = {}
    for row in rows:
        y = row[metric]
        if not math.isfinite(y):
            continue
        buckets.setdefault((row[group_by], row["value"]), []).append(y)
    if not buckets:
        raise SchemaError(f"no finite values in column {metric!r}")
    series = {}
    for group in sorted({g for g, _ in buckets}, key=str):
        xs = sorted(x for g, x in buckets if g == group)
        ys = [buckets[(group, x)] for x in xs]
        series[group] = (
            xs,
            [sum(v) / len(v) for v in ys],
            [min(v) for v in ys],
            [max(v) for v in ys],
        )
    return series


def _load_all_results(paths):
    rows = []
    for path in paths:
        rows.extend(load_results(path))
    axes = sorted({row["axis"] for row in rows})
    if len(axes) > 1:
        raise SchemaError(f"inputs mix sweep axes {axes}; one axis per figure")
    return rows, axes[0]


def _x_for_axis(axis, xs):
    if axis in POWER_AXES:
        return [to_dbm(x) for x in xs]
    return list(xs)


def _plot_banded(ax, axis, series, fmt="o-"):
    for group, (xs, mean, lo, hi) in series.items():
        xplot = _x_for_axis(axis, xs)
        line, = ax.plot(xplot, mean, fmt, label=str(group))
        ax.fill_between(xplot, lo, hi, alpha=0.18, color=line.get_color())


def _render_metric_vs_axis(spec: FigureSpec, ax):
    rows, axis = _load_all_results(spec.inputs)
    series = series_from_rows(rows, spec.metric, spec.group_by)
    _plot_banded(ax, axis, series)
    ax.set_xlabel(axis_label(axis))
    ax.set_ylabel(METRIC_LABELS[spec.metric])
    ax.legend(title=spec.group_by)


def _render_dual_axis(spec: FigureSpec, ax):
    rows, axis = _load_all_results(spec.inputs)
    se = series_from_rows(rows, "se_bps_hz", spec.group_by)
    ee = series_from_rows(rows, "ee_bps_hz_w", spec.group_by)
    right = ax.twinx()
    _plot_banded(ax, axis, se, fmt="o-")
    _plot_banded(right, axis, ee, fmt="s--")
    ax.set_xlabel(axis_label(axis))
    ax.set_ylabel(METRIC_LABELS["se_bps_hz"])
    right.set_ylabel(METRIC_LABELS["ee_bps_hz_w"])
    lines, labels = ax.get_legend_handles_labels()
    rlines, rlabels = right.get_legend_handles_labels()
    ax.legend(lines + rlines,
              [f"SE {s}" for s in labels] + [f"EE {s}" for s in rlabels])


def _render_convergence(spec: FigureSpec, ax):
    for path in spec.inputs:
        records = load_trace(path)
        xs = [r["iteration"] for r in records]
        ys = [r[spec.metric] for r in records]
        ax.plot(xs, ys, "o-", label=Path(path).stem)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel(TRACE_LABELS[spec.metric])
    if len(spec.inputs) > 1:
        ax.legend()


_RENDERERS = {
    "metric_vs_axis": _render_metric_vs_axis,
    "dual_axis_se_ee": _render_dual_axis,
    "convergence": _render_convergence,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.out_path; returns the written path."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        _RENDERERS[spec.kind](spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = Path(spec.out_path)
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return out
