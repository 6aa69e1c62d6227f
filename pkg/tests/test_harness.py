import math

import numpy as np
import pytest

import cfris.harness as harness
from cfris.config import desk_config
from cfris.harness import (AXES, CSV_HEADER, METHODS, ResultRow, SweepSpec,
                           aggregate_rows, apply_axis, apply_method, load_rows,
                           run_sweep, run_trial, trial_seed, write_rows)
from cfris.optimizer import SolverOptions


FAST = SolverOptions(eps_inner=1e-3, eps_outer=1e-3, max_inner=10, max_outer=12)


def test_csv_header_pinned():
    assert CSV_HEADER == ("axis,value,method,seed,se_bps_hz,ee_bps_hz_w,"
                          "objective,p_sys_w,max_residual,outer_iters,"
                          "wall_ms,feasible")


def test_trial_seed_stable_and_distinct():
    a = trial_seed(0, "kappa", 0.5, "ARIS", 3)
    assert a == trial_seed(0, "kappa", 0.5, "ARIS", 3)
    assert 0 <= a < 2 ** 63
    others = {
        trial_seed(0, "kappa", 0.5, "ARIS", 4),
        trial_seed(0, "kappa", 1.0, "ARIS", 3),
        trial_seed(0, "kappa", 0.5, "PRIS", 3),
        trial_seed(1, "kappa", 0.5, "ARIS", 3),
        trial_seed(0, "M", 0.5, "ARIS", 3),
    }
    assert a not in others


def test_apply_axis_each_branch():
    cfg = desk_config()
    assert apply_axis(cfg, "P_A_max", 2.0).p_ap_max == (2.0, 2.0)
    assert apply_axis(cfg, "kappa", 0.25).kappa == 0.25
    assert apply_axis(cfg, "dac_bits", 4).bits_per_ap == (4, 4)
    assert apply_axis(cfg, "M", 4).n_ris_elements == 4
    assert apply_axis(cfg, "Q", 3).n_aps == 3
    assert apply_axis(cfg, "K", 1).n_users == 1
    assert apply_axis(cfg, "d_U", 8.0).user_distance == 8.0
    with pytest.raises(ValueError):
        apply_axis(cfg, "B", 4)


def test_apply_axis_rejects_non_uniform_resize():
    cfg = desk_config().replace(p_ap_max=(1.0, 2.0))
    with pytest.raises(ValueError):
        apply_axis(cfg, "Q", 3)


def test_apply_method_aris_is_identity():
    cfg = desk_config()
    adjusted, plan = apply_method(cfg, "ARIS", 0)
    assert adjusted is cfg
    assert plan.optimize_phi and plan.enforce_min_rate
    assert plan.ris_reflect_constraint and plan.include_ris_power
    assert plan.fixed_phi is None


def test_apply_method_pris_strips_active_hardware():
    cfg = desk_config()
    adjusted, plan = apply_method(cfg, "PRIS", 0)
    assert adjusted.sigma2_ris == (0.0,) * cfg.n_ris
    assert adjusted.p_ris_bias == 0.0
    assert adjusted.beta_max == 1.0
    assert plan.optimize_phi
    assert not plan.enforce_min_rate
    assert not plan.ris_reflect_constraint
    assert not plan.include_ris_power


def test_apply_method_rnd_aris_freezes_full_gain_phases():
    cfg = desk_config()
    _, plan = apply_method(cfg, "RND_ARIS", 7)
    assert not plan.optimize_phi
    assert plan.ris_reflect_constraint and plan.include_ris_power
    lm = cfg.n_ris * cfg.n_ris_elements
    assert plan.fixed_phi.shape == (lm,)
    assert np.allclose(np.abs(plan.fixed_phi), cfg.beta_max, atol=1e-12)
    _, plan2 = apply_method(cfg, "RND_ARIS", 7)
    assert np.array_equal(plan.fixed_phi, plan2.fixed_phi)
    _, plan3 = apply_method(cfg, "RND_ARIS", 8)
    assert not np.allclose(plan.fixed_phi, plan3.fixed_phi)
    with pytest.raises(ValueError):
        apply_method(cfg, "MRT", 0)


def test_run_trial_deterministic_except_wall_clock():
    cfg = desk_config()
    row1 = run_trial(cfg, "ARIS", 5, FAST, axis="kappa", value=0.5)
    row2 = run_trial(cfg, "ARIS", 5, FAST, axis="kappa", value=0.5)
    fields1, fields2 = row1.csv_fields(), row2.csv_fields()
    assert fields1[:10] == fields2[:10]
    assert fields1[11] == fields2[11]
    assert math.isfinite(row1.se) and row1.se > 0


def test_result_row_formatting():
    row = ResultRow(axis="dac_bits", value=3, method="ARIS", seed=9,
                    se=1.25, ee=0.5, objective=0.75, p_sys=4.0,
                    max_residual=1e-9, outer_iters=7, wall_ms=123.0,
                    feasible=True)
    fields = row.csv_fields()
    assert fields[1] == "3"          # integer axis values stay integers
    assert fields[4] == "1.25"
    assert fields[11] == "true"
    row_f = ResultRow(axis="kappa", value=0.5, method="ARIS", seed=9,
                      se=float("nan"), ee=float("nan"), objective=float("nan"),
                      p_sys=float("nan"), max_residual=float("nan"),
                      outer_iters=0, wall_ms=1.0, feasible=False)
    fields_f = row_f.csv_fields()
    assert fields_f[1] == "0.5"
    assert fields_f[4] == "nan"
    assert fields_f[11] == "false"


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(axis="bogus", values=(1,))
    with pytest.raises(ValueError):
        SweepSpec(axis="kappa", values=())
    with pytest.raises(ValueError):
        SweepSpec(axis="kappa", values=(0.5,), methods=("MRT",))
    with pytest.raises(ValueError):
        SweepSpec(axis="kappa", values=(0.5,), trials=0)


def test_run_sweep_counts_order_and_round_trip(tmp_path):
    spec = SweepSpec(axis="kappa", values=(0.0, 1.0), methods=("ARIS",),
                     trials=2)
    out = tmp_path / "sweep.csv"
    rows, aggregates = run_sweep(spec, out_path=out, opts=FAST)
    assert len(rows) == 4
    # canonical order: value-major, then trial
    assert [r.value for r in rows] == [0.0, 0.0, 1.0, 1.0]
    assert all(r.axis == "kappa" and r.method == "ARIS" for r in rows)
    seeds = [trial_seed(0, "kappa", v, "ARIS", t)
             for v in (0.0, 1.0) for t in range(2)]
    assert [r.seed for r in rows] == seeds

    loaded = load_rows(out)
    assert len(loaded) == 4
    for orig, back in zip(rows, loaded):
        assert back.csv_fields() == orig.csv_fields()

    assert len(aggregates) == 2
    for agg in aggregates:
        group = [r for r in rows if r.value == agg.value]
        assert agg.n_trials == 2
        assert agg.mean_se == pytest.approx(
            float(np.mean([r.se for r in group])), rel=1e-12)


def test_run_sweep_parallel_matches_serial(tmp_path):
    spec = SweepSpec(axis="dac_bits", values=(1, 8), methods=("ARIS",), trials=1)
    rows_serial, _ = run_sweep(spec, opts=FAST)
    rows_parallel, _ = run_sweep(spec, opts=FAST, workers=2)
    for a, b in zip(rows_serial, rows_parallel):
        assert a.csv_fields()[:10] == b.csv_fields()[:10]
    with pytest.raises(ValueError):
        run_sweep(spec, workers=0)


def test_run_sweep_records_failures_and_continues(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(harness, "run_trial", boom)
    spec = SweepSpec(axis="kappa", values=(0.0, 0.5), methods=("ARIS",), trials=2)
    out = tmp_path / "failed.csv"
    rows, aggregates = run_sweep(spec, out_path=out)
    assert len(rows) == 4
    assert all(math.isnan(r.se) and not r.feasible for r in rows)
    text = out.read_text().strip().split("\n")
    assert text[0] == CSV_HEADER
    assert len(text) == 5
    for agg in aggregates:
        assert agg.n_ok == 0
        assert math.isnan(agg.mean_se)


def test_aggregate_rows_skips_non_finite():
    good = ResultRow(axis="kappa", value=0.5, method="ARIS", seed=1,
                     se=2.0, ee=0.2, objective=0.3, p_sys=10.0,
                     max_residual=0.0, outer_iters=3, wall_ms=1.0, feasible=True)
    bad = ResultRow(axis="kappa", value=0.5, method="ARIS", seed=2,
                    se=float("nan"), ee=float("nan"), objective=float("nan"),
                    p_sys=float("nan"), max_residual=float("nan"),
                    outer_iters=0, wall_ms=1.0, feasible=False)
    (agg,) = aggregate_rows([good, bad])
    assert agg.mean_se == 2.0
    assert agg.n_ok == 1 and agg.n_trials == 2


def test_write_rows_then_load_rows(tmp_path):
    rows = [ResultRow(axis="M", value=16, method="PRIS", seed=4,
                      se=1.5, ee=0.25, objective=0.4, p_sys=6.0,
                      max_residual=1e-8, outer_iters=9, wall_ms=2.5,
                      feasible=True)]
    path = tmp_path / "rows.csv"
    write_rows(path, rows)
    loaded = load_rows(path)
    assert loaded[0].csv_fields() == rows[0].csv_fields()
    with pytest.raises(ValueError):
        load_rows(__file__)


def test_methods_and_axes_pinned():
    assert METHODS == ("ARIS", "PRIS", "RND_ARIS")
    assert AXES == ("P_A_max", "kappa", "dac_bits", "M", "Q", "K", "d_U")
