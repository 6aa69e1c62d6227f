"""Command-line entry point: single runs, sweeps, validation, trace export.

Human-readable tables go to standard output; data goes to files named with
--out. Every verb echoes the effective configuration and finishes with one
machine-readable RESULT line per datum so scripts never have to parse the
tables. An infeasible run is data (feasible=false), not an error; only bad
arguments (exit 2) and validation failures (exit 1) change the exit code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (SystemConfig, PROFILES, apply_overrides, config_to_dict,
                     dbm_to_watt, load_config, parse_override, profile_config)
from .harness import (AXES, CSV_HEADER, METHODS, SweepSpec, run_sweep,
                      run_trial_detailed, write_rows)
from .validation import run_all_checks


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file path (key = value lines)")
    parser.add_argument("--profile", choices=PROFILES, default="desk",
                        help="named base profile (default: desk)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="config field override, repeatable")
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--kappa", type=float, help="objective weight in [0, 1]")
    parser.add_argument("--pmax-dbm", type=float,
                        help="per-AP transmit power cap in dBm")
    parser.add_argument("--dac-bits", type=int, help="uniform DAC resolution")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfris",
        description="Wideband cell-free downlink with active reflecting surfaces")
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="one scenario draw, one method")
    _add_common(run_p)
    run_p.add_argument("--methods", default="ARIS",
                       help="method to run (single tag)")
    run_p.add_argument("--out", help="result CSV path; a *_trace.csv lands beside it")

    sweep_p = sub.add_parser("sweep", help="Monte Carlo sweep over one axis")
    _add_common(sweep_p)
    sweep_p.add_argument("--axis", required=True, choices=AXES)
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated axis values")
    sweep_p.add_argument("--methods", default=",".join(METHODS),
                         help="comma-separated method tags")
    sweep_p.add_argument("--trials", type=int, default=10)
    sweep_p.add_argument("--out", help="sweep CSV path")

    val_p = sub.add_parser("validate", help="run the invariant check suite")
    _add_common(val_p)

    trace_p = sub.add_parser("trace", help="export one run's convergence history")
    _add_common(trace_p)
    trace_p.add_argument("--methods", default="ARIS",
                         help="method to run (single tag)")
    trace_p.add_argument("--out", help="trace CSV path")
    return parser


def _assemble_config(args, parser) -> SystemConfig:
    try:
        if args.config:
            config = load_config(args.config)
        else:
            config = profile_config(args.profile)
        overrides = [parse_override(item) for item in args.set]
        config = apply_overrides(config, overrides)
        extra = {}
        if args.kappa is not None:
            extra["kappa"] = args.kappa
        if args.pmax_dbm is not None:
            extra["p_ap_max"] = dbm_to_watt(args.pmax_dbm)
        if args.dac_bits is not None:
            extra["bits_per_ap"] = args.dac_bits
        extra["seed"] = args.seed
        return config.replace(**extra)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))


def _echo_config(config: SystemConfig) -> None:
    print("config:")
    for key, value in config_to_dict(config).items():
        print(f"  {key}={value}")


def _parse_axis_values(text: str, parser):
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(int(part))
        except ValueError:
            try:
                values.append(float(part))
            except ValueError:
                parser.error(f"axis value {part!r} is not a number")
    if not values:
        parser.error("--values is empty")
    return tuple(values)


def _single_method(text: str, parser) -> str:
    tags = [t.strip() for t in text.split(",") if t.strip()]
    if len(tags) != 1:
        parser.error("this verb takes exactly one method")
    if tags[0] not in METHODS:
        parser.error(f"unknown method {tags[0]!r}; expected one of {METHODS}")
    return tags[0]


def _cmd_run(args, parser) -> int:
    config = _assemble_config(args, parser)
    method = _single_method(args.methods, parser)
    _echo_config(config)
    row, result = run_trial_detailed(config, method, args.seed,
                                     axis="run", value=0)
    print(f"method={method} seed={args.seed}")
    print(f"  se        {row.se:.6f} bit/s/Hz")
    print(f"  ee        {row.ee:.6f} bit/s/Hz/W")
    print(f"  objective {row.objective:.6f}")
    print(f"  p_sys     {row.p_sys:.6f} W")
    print(f"  residual  {row.max_residual:.3e}")
    print(f"  outer     {row.outer_iters}  feasible {str(row.feasible).lower()}")
    if args.out:
        out = Path(args.out)
        write_rows(out, [row])
        trace_path = out.with_name(out.stem + "_trace.csv")
        result.trace.to_csv(trace_path)
        print(f"wrote {out} and {trace_path}")
    print(f"RESULT verb=run method={method} seed={args.seed} "
          f"se={row.se!r} ee={row.ee!r} objective={row.objective!r} "
          f"p_sys={row.p_sys!r} max_residual={row.max_residual!r} "
          f"outer_iters={row.outer_iters} feasible={str(row.feasible).lower()}")
    return 0


def _cmd_sweep(args, parser) -> int:
    config = _assemble_config(args, parser)
    values = _parse_axis_values(args.values, parser)
    methods = tuple(t.strip() for t in args.methods.split(",") if t.strip())
    try:
        spec = SweepSpec(axis=args.axis, values=values, methods=methods,
                         trials=args.trials, config=config, base_seed=args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    _echo_config(config)
    rows, aggregates = run_sweep(spec, out_path=args.out)
    print(f"{len(rows)} rows ({len(values)} values x {len(methods)} methods "
          f"x {spec.trials} trials)")
    print(f"{'value':>12} {'method':>10} {'mean_se':>12} {'mean_ee':>12} {'ok':>7}")
    for agg in aggregates:
        print(f"{agg.value!r:>12} {agg.method:>10} {agg.mean_se:12.6f} "
              f"{agg.mean_ee:12.6f} {agg.n_ok:4d}/{agg.n_trials}")
    if args.out:
        print(f"wrote {args.out}")
    for agg in aggregates:
        print(f"RESULT verb=sweep axis={agg.axis} value={agg.value!r} "
              f"method={agg.method} mean_se={agg.mean_se!r} "
              f"mean_ee={agg.mean_ee!r} mean_objective={agg.mean_objective!r} "
              f"mean_p_sys={agg.mean_p_sys!r} n_ok={agg.n_ok} "
              f"n_trials={agg.n_trials}")
    return 0


def _cmd_validate(args, parser) -> int:
    config = _assemble_config(args, parser)
    _echo_config(config)
    results = run_all_checks(config, args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name.ljust(width)}  {r.detail}")
    n_pass = sum(r.passed for r in results)
    n_fail = len(results) - n_pass
    print(f"RESULT verb=validate passed={n_pass} failed={n_fail}")
    return 0 if n_fail == 0 else 1


def _cmd_trace(args, parser) -> int:
    config = _assemble_config(args, parser)
    method = _single_method(args.methods, parser)
    _echo_config(config)
    row, result = run_trial_detailed(config, method, args.seed,
                                     axis="run", value=0)
    if args.out:
        result.trace.to_csv(args.out)
        print(f"wrote {args.out}")
    else:
        print("iteration objective se ee tau")
        for rec in result.trace.records:
            print(f"{rec.iteration:9d} {rec.objective:.8f} {rec.se:.6f} "
                  f"{rec.ee:.6f} {rec.tau:.6g}")
    final = result.trace.records[-1]
    print(f"RESULT verb=trace method={method} seed={args.seed} "
          f"iterations={final.iteration} objective={final.objective!r} "
          f"converged={str(result.converged).lower()} "
          f"feasible={str(row.feasible).lower()}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep,
                "validate": _cmd_validate, "trace": _cmd_trace}
    return handlers[args.verb](args, parser)


if __name__ == "__main__":
    sys.exit(main())
