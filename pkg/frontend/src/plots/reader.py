"""Read sweep-result and trace CSVs produced by the simulation harness.

This package talks to the simulator only through these two documented file
schemas; nothing here imports the simulator.
"""

from __future__ import annotations

import csv

RESULT_COLUMNS = ("axis", "value", "method", "seed", "se_bps_hz",
                  "ee_bps_hz_w", "objective", "p_sys_w", "max_residual",
                  "outer_iters", "wall_ms", "feasible")

TRACE_COLUMNS = ("iteration", "objective", "se", "ee", "tau", "max_residual",
                 "inner_precoder", "inner_ris", "wall_ms")


class SchemaError(ValueError):
    """The input file does not conform to the documented CSV schema."""


def _read_rows(path, required, label):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise SchemaError(f"{path}: file is empty, expected the {label} "
                              f"header {','.join(required)}")
        missing = [col for col in required if col not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required columns: {', '.join(missing)} "
                f"(expected the {label} schema: {','.join(required)})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows below the header")
    return rows


def _to_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise SchemaError(f"cannot parse boolean field value {raw!r}")


def load_results(path) -> list:
    """Parse a sweep-result CSV into a list of typed dicts."""
    out = []
    for raw in _read_rows(path, RESULT_COLUMNS, "sweep-result"):
        out.append({
            "axis": raw["axis"],
            "value": float(raw["value"]),
            "method": raw["method"],
            "seed": int(raw["seed"]),
            "se_bps_hz": float(raw["se_bps_hz"]),
            "ee_bps_hz_w": float(raw["ee_bps_hz_w"]),
            "objective": float(raw["objective"]),
            "p_sys_w": float(raw["p_sys_w"]),
            "max_residual": float(raw["max_residual"]),
            "outer_iters": int(raw["outer_iters"]),
            "wall_ms": float(raw["wall_ms"]),
            "feasible": _to_bool(raw["feasible"]),
        })
    return out


def load_trace(path) -> list:
    """Parse a per-iteration trace CSV into a list of typed dicts."""
    out = []
    for raw in _read_rows(path, TRACE_COLUMNS, "trace"):
        out.append({
            "iteration": int(raw["iteration"]),
            "objective": float(raw["objective"]),
            "se": float(raw["se"]),
            "ee": float(raw["ee"]),
            "tau": float(raw["tau"]),
            "max_residual": float(raw["max_residual"]),
            "inner_precoder": int(raw["inner_precoder"]),
            "inner_ris": int(raw["inner_ris"]),
            "wall_ms": float(raw["wall_ms"]),
        })
    return out
