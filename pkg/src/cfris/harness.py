"""Monte Carlo sweeps over scenario axes, method baselines, CSV emission.

A sweep walks one axis (power budget, scalarization weight, DAC resolution,
element or node counts, user distance), runs each configured method for a
number of independent trials per point, and writes one CSV row per trial.
Trial seeds are derived from the base seed and the (axis, value, method,
trial) key through a stable hash, so any row can be reproduced in isolation
and the full file is bit-reproducible apart from wall-clock columns.

Methods:
  ARIS      active surface, full alternating design
  PRIS      passive surface: no thermal noise at the elements, unit modulus
            bound, no reflect-power constraint or draw, no DC bias power
  RND_ARIS  active surface with frozen random phases at the amplitude bound;
            only the precoders are optimized

Trials are independent and can be dispatched to a bounded thread pool; rows
are collected by trial index and written by the caller in canonical order,
so the worker count never changes the output file.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import generate_channels, place_nodes, seeded_rng
from .config import SystemConfig, desk_config
from .metrics import NoiseModel, evaluate, feasibility_residuals
from .optimizer import OptimizationPlan, SolverOptions, optimize
from .quantization import DacModel

METHODS = ("ARIS", "PRIS", "RND_ARIS")
AXES = ("P_A_max", "kappa", "dac_bits", "M", "Q", "K", "d_U")
CSV_HEADER = ("axis,value,method,seed,se_bps_hz,ee_bps_hz_w,objective,"
              "p_sys_w,max_residual,outer_iters,wall_ms,feasible")
RESIDUAL_TOL = 1e-6


# ---- axis application ----


def _uniform_scalar(values, name):
    first = values[0]
    if any(v != first for v in values):
        raise ValueError(f"cannot resize non-uniform {name} {values!r}")
    return first


def _set_ap_count(config: SystemConfig, q: int) -> SystemConfig:
    return config.replace(
        n_aps=q,
        p_ap_max=_uniform_scalar(config.p_ap_max, "p_ap_max"),
        p_ap_circuit=_uniform_scalar(config.p_ap_circuit, "p_ap_circuit"),
        p_backhaul=_uniform_scalar(config.p_backhaul, "p_backhaul"),
        bits_per_ap=_uniform_scalar(config.bits_per_ap, "bits_per_ap"))


def _set_user_count(config: SystemConfig, k: int) -> SystemConfig:
    return config.replace(
        n_users=k,
        p_user_circuit=_uniform_scalar(config.p_user_circuit, "p_user_circuit"))


def apply_axis(config: SystemConfig, axis: str, value) -> SystemConfig:
    """Config with one sweep axis set to the given value."""
    if axis == "P_A_max":
        return config.replace(p_ap_max=float(value))
    if axis == "kappa":
        return config.replace(kappa=float(value))
    if axis == "dac_bits":
        return config.replace(bits_per_ap=int(value))
    if axis == "M":
        return config.replace(n_ris_elements=int(value))
    if axis == "Q":
        return _set_ap_count(config, int(value))
    if axis == "K":
        return _set_user_count(config, int(value))
    if axis == "d_U":
        return config.replace(user_distance=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


# ---- methods ----


def apply_method(config: SystemConfig, method: str, seed: int):
    """Method-adjusted config and run plan for one trial.

    The channel draw depends only on counts, geometry, and the frequency
    grid, none of which a method touches, so trials with a common seed see
    identical channels across methods.
    """
    if method == "ARIS":
        return config, OptimizationPlan()
    if method == "PRIS":
        adjusted = config.replace(sigma2_ris=0.0, p_ris_bias=0.0, beta_max=1.0)
        plan = OptimizationPlan(optimize_phi=True, enforce_min_rate=False,
                                ris_reflect_constraint=False,
                                include_ris_power=False)
        return adjusted, plan
    if method == "RND_ARIS":
        rng = seeded_rng(seed, "phases")
        theta = rng.uniform(0.0, 2.0 * np.pi,
                            config.n_ris * config.n_ris_elements)
        plan = OptimizationPlan(optimize_phi=False, enforce_min_rate=False,
                                ris_reflect_constraint=True,
                                include_ris_power=True,
                                fixed_phi=config.beta_max * np.exp(1j * theta))
        return config, plan
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


# ---- rows ----


@dataclass(frozen=True)
class ResultRow:
    axis: str
    value: object
    method: str
    seed: int
    se: float
    ee: float
    objective: float
    p_sys: float
    max_residual: float
    outer_iters: int
    wall_ms: float
    feasible: bool

    def csv_fields(self) -> list:
        return [self.axis, _format_value(self.value), self.method,
                str(self.seed), repr(float(self.se)), repr(float(self.ee)),
                repr(float(self.objective)), repr(float(self.p_sys)),
                repr(float(self.max_residual)), str(self.outer_iters),
                repr(float(self.wall_ms)),
                "true" if self.feasible else "false"]


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise TypeError("axis values cannot be booleans")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trial_seed(base_seed: int, axis: str, value, method: str, trial: int) -> int:
    """Stable per-trial seed: base seed XOR a hash of the row key."""
    key = f"{axis}={value!r}|{method}|{trial}".encode()
    digest = hashlib.sha256(key).digest()
    return (base_seed ^ int.from_bytes(digest[:8], "big")) & (2 ** 63 - 1)


def run_trial_detailed(config: SystemConfig, method: str, seed: int,
                       opts: SolverOptions | None = None,
                       axis: str = "", value=None):
    """One scenario draw, one method; returns (ResultRow, OptimizeResult).

    The reported numbers always come from a fresh evaluation of the returned
    design point, never from solver-internal values. A run that had to drop
    the minimum-rate floor is marked infeasible even though the relaxed
    solve finished.
    """
    opts = opts or SolverOptions()
    adjusted, plan = apply_method(config, method, seed)
    geometry = place_nodes(adjusted, seed)
    channels = generate_channels(adjusted, geometry, seed)
    started = time.perf_counter()
    result = optimize(channels, adjusted, opts, seed, plan)
    wall_ms = (time.perf_counter() - started) * 1e3
    dac = DacModel.from_bits(adjusted.bits_per_ap)
    noise = NoiseModel.from_config(adjusted)
    met = evaluate(channels, result.design, adjusted, dac, noise,
                   plan.include_ris_power)
    residuals = feasibility_residuals(
        channels, result.design, adjusted, dac, noise,
        enforce_min_rate=plan.enforce_min_rate and not result.rate_infeasible,
        check_ris_power=plan.ris_reflect_constraint)
    finite = all(math.isfinite(x) for x in
                 (met.se, met.ee, met.objective, met.power.p_sys))
    feasible = (finite and residuals.max_relative <= RESIDUAL_TOL
                and not result.rate_infeasible)
    row = ResultRow(axis=axis, value=value, method=method, seed=seed,
                    se=met.se, ee=met.ee, objective=met.objective,
                    p_sys=met.power.p_sys,
                    max_residual=residuals.max_relative,
                    outer_iters=len(result.trace.records), wall_ms=wall_ms,
                    feasible=feasible)
    return row, result


def run_trial(config: SystemConfig, method: str, seed: int,
              opts: SolverOptions | None = None,
              axis: str = "", value=None) -> ResultRow:
    """Row-only variant of run_trial_detailed."""
    row, _ = run_trial_detailed(config, method, seed, opts, axis=axis, value=value)
    return row


def _failure_row(axis, value, method, seed, wall_ms) -> ResultRow:
    nan = float("nan")
    return ResultRow(axis=axis, value=value, method=method, seed=seed,
                     se=nan, ee=nan, objective=nan, p_sys=nan,
                     max_residual=nan, outer_iters=0, wall_ms=wall_ms,
                     feasible=False)


# ---- sweeps ----


@dataclass
class SweepSpec:
    axis: str
    values: tuple
    methods: tuple = METHODS
    trials: int = 10
    config: SystemConfig = field(default_factory=desk_config)
    base_seed: int = 0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        self.values = tuple(self.values)
        self.methods = tuple(self.methods)
        if not self.values:
            raise ValueError("sweep needs at least one axis value")
        if not self.methods:
            raise ValueError("sweep needs at least one method")
        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SweepAggregate:
    axis: str
    value: object
    method: str
    mean_se: float
    mean_ee: float
    mean_objective: float
    mean_p_sys: float
    n_ok: int
    n_trials: int


def aggregate_rows(rows) -> list:
    """Arithmetic means per (value, method), finite rows only."""
    groups = {}
    for row in rows:
        groups.setdefault((row.axis, row.value, row.method), []).append(row)
    out = []
    for (axis, value, method), members in groups.items():
        ok = [r for r in members if math.isfinite(r.se)]
        if ok:
            out.append(SweepAggregate(
                axis=axis, value=value, method=method,
                mean_se=float(np.mean([r.se for r in ok])),
                mean_ee=float(np.mean([r.ee for r in ok])),
                mean_objective=float(np.mean([r.objective for r in ok])),
                mean_p_sys=float(np.mean([r.p_sys for r in ok])),
                n_ok=len(ok), n_trials=len(members)))
        else:
            nan = float("nan")
            out.append(SweepAggregate(axis=axis, value=value, method=method,
                                      mean_se=nan, mean_ee=nan,
                                      mean_objective=nan, mean_p_sys=nan,
                                      n_ok=0, n_trials=len(members)))
    return out


def _one_trial(config, method, seed, opts, axis, value) -> ResultRow:
    started = time.perf_counter()
    try:
        return run_trial(config, method, seed, opts, axis=axis, value=value)
    except Exception:
        return _failure_row(axis, value, method, seed,
                            (time.perf_counter() - started) * 1e3)


def run_sweep(spec: SweepSpec, out_path=None, opts: SolverOptions | None = None,
              workers: int = 1):
    """Execute a sweep; returns (rows, aggregates).

    Rows are written to out_path incrementally, one (value, method) group at
    a time, always in canonical (value, method, trial) order. Failed trials
    become NaN rows with feasible=false and the sweep continues.
    """
    opts = opts or SolverOptions()
    if workers < 1:
        raise ValueError("workers must be >= 1")
    rows = []
    stream = open(out_path, "w") if out_path is not None else None
    try:
        if stream is not None:
            stream.write(CSV_HEADER + "\n")
            stream.flush()
        for value in spec.values:
            point_config = apply_axis(spec.config, spec.axis, value)
            for method in spec.methods:
                seeds = [trial_seed(spec.base_seed, spec.axis, value, method, t)
                         for t in range(spec.trials)]
                if workers == 1:
                    group = [_one_trial(point_config, method, seed, opts,
                                        spec.axis, value) for seed in seeds]
                else:
                    with ThreadPoolExecutor(max_workers=workers) as pool:
                        futures = [pool.submit(_one_trial, point_config, method,
                                               seed, opts, spec.axis, value)
                                   for seed in seeds]
                        group = [f.result() for f in futures]
                rows.extend(group)
                if stream is not None:
                    for row in group:
                        stream.write(",".join(row.csv_fields()) + "\n")
                    stream.flush()
    finally:
        if stream is not None:
            stream.close()
    return rows, aggregate_rows(rows)


def write_rows(path, rows) -> None:
    """Write a complete result CSV in one go (same format as run_sweep)."""
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(row.csv_fields()) + "\n")


def load_rows(path) -> list:
    """Read a result CSV back into ResultRow objects."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 12:
                raise ValueError(f"malformed CSV row {line!r}")
            axis, raw_value, method = parts[0], parts[1], parts[2]
            try:
                value = int(raw_value)
            except ValueError:
                value = float(raw_value)
            rows.append(ResultRow(
                axis=axis, value=value, method=method, seed=int(parts[3]),
                se=float(parts[4]), ee=float(parts[5]),
                objective=float(parts[6]), p_sys=float(parts[7]),
                max_residual=float(parts[8]), outer_iters=int(parts[9]),
                wall_ms=float(parts[10]), feasible=parts[11] == "true"))
    return rows
