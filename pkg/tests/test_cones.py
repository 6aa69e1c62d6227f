import math

import numpy as np
import pytest

from cfris.cones import (ConeBlock, ConicProgram, ProgramBuilder,
                         complex_expression_rows, deinterleave_complex, dump,
                         embed_complex_quadratic, interleave_complex, solve)
import scipy.sparse as sp


def test_box_program():
    b = ProgramBuilder()
    x = b.real_var()
    b.add_objective(x, 1.0)
    with b.block("nonneg") as blk:
        blk.row(x, 1.0, 0.0)          # x >= 0
        blk.row(x, -1.0, 1.0)         # 1 - x >= 0
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-6)


def test_exp_cone_computes_log2():
    # u <= log2(4) encoded as exp(u ln 2) <= 4
    b = ProgramBuilder()
    u = b.real_var()
    b.add_objective(u, 1.0)
    with b.block("exp") as blk:
        blk.row(u, math.log(2.0), 0.0)
        blk.row(offset=1.0)
        blk.row(offset=4.0)
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0, abs=1e-6)


def test_rsoc_computes_sqrt():
    # s <= sqrt(9) encoded as 9 * 1 >= s^2
    b = ProgramBuilder()
    s = b.real_var()
    b.add_objective(s, 1.0)
    with b.block("rsoc") as blk:
        blk.row(offset=9.0)
        blk.row(offset=1.0)
        blk.row(s, 1.0, 0.0)
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(3.0, abs=1e-6)


def test_soc_ball_constraint():
    b = ProgramBuilder()
    xy = b.real_var(2)
    b.add_objective(xy, [1.0, 1.0])
    with b.block("soc") as blk:
        blk.row(offset=5.0)
        blk.row(xy[0], 1.0)
        blk.row(xy[1], 1.0)
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(5.0 * math.sqrt(2.0), abs=1e-5)
    assert sol.x[0] == pytest.approx(5.0 / math.sqrt(2.0), abs=1e-5)


def test_rsoc_epigraph_projection():
    # minimize t with ||x - p||^2 <= t: optimum x = p, t = 0
    p = np.array([0.4, -1.3])
    b = ProgramBuilder()
    t = b.real_var()
    x = b.real_var(2)
    b.add_objective(t, -1.0)
    with b.block("rsoc") as blk:
        blk.row(t, 1.0)
        blk.row(offset=1.0)
        blk.row(x[0], 1.0, -p[0])
        blk.row(x[1], 1.0, -p[1])
    with b.block("nonneg") as blk:
        blk.row(t, 1.0)
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert np.allclose(sol.x[1:], p, atol=1e-4)
    assert sol.x[0] == pytest.approx(0.0, abs=1e-5)


def test_infeasible_detected():
    b = ProgramBuilder()
    x = b.real_var()
    b.add_objective(x, 1.0)
    with b.block("nonneg") as blk:
        blk.row(x, 1.0, -1.0)  # x >= 1
        blk.row(x, -1.0, 0.0)  # x <= 0
    assert solve(b.finish()).status == "infeasible"


def test_unbounded_detected():
    b = ProgramBuilder()
    x = b.real_var()
    b.add_objective(x, 1.0)
    with b.block("nonneg") as blk:
        blk.row(x, 1.0, 0.0)
    assert solve(b.finish()).status == "unbounded"


def test_complex_ball_maximization():
    # max Re(conj(a) z) over |z| <= 1 has optimum z = a / |a|
    a = 0.8 - 1.7j
    b = ProgramBuilder()
    z = b.complex_var(1)
    b.add_objective_complex(z, [np.conj(a)])
    with b.block("soc") as blk:
        blk.row(offset=1.0)
        blk.complex_rows([(z, [1.0])])
    sol = solve(b.finish())
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(abs(a), abs=1e-6)
    z_opt = z.value(sol.x)[0]
    assert z_opt == pytest.approx(a / abs(a), abs=1e-5)


def test_real_part_row_pins_halfplane():
    # fix Re((1+1j) z) = 2 with z real-imag symmetric: minimize |z| picks
    # z = (1 - 1j) * ... the projection onto the halfplane boundary
    w = 1.0 + 1.0j
    b = ProgramBuilder()
    z = b.complex_var(1)
    t = b.real_var()
    b.add_objective(t, -1.0)
    with b.block("zero") as blk:
        blk.real_part_row([(z, [w])], offset=-2.0)
    with b.block("soc") as blk:
        blk.row(t, 1.0)
        blk.complex_rows([(z, [1.0])])
    sol = solve(b.finish())
    assert sol.status == "optimal"
    z_opt = z.value(sol.x)[0]
    assert np.real(w * z_opt) == pytest.approx(2.0, abs=1e-6)
    # the least-norm point is conj(w) scaled: 2 conj(w) / |w|^2
    assert z_opt == pytest.approx(2.0 * np.conj(w) / abs(w) ** 2, abs=1e-5)


def test_embed_complex_quadratic_round_trip():
    rng = np.random.default_rng(0)
    weights = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    offsets = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a, b = embed_complex_quadratic(weights, offsets)
    x = interleave_complex(z)
    lhs = float(np.sum((a @ x + b) ** 2))
    rhs = float(np.sum(np.abs(weights @ z + offsets) ** 2))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_complex_expression_rows_round_trip():
    rng = np.random.default_rng(1)
    w = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    off = 0.3 - 0.8j
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    a, b = complex_expression_rows(w, off)
    out = a @ interleave_complex(z) + b
    e = np.sum(w * z) + off
    assert out[0] == pytest.approx(np.real(e), abs=1e-12)
    assert out[1] == pytest.approx(np.imag(e), abs=1e-12)


def test_interleave_round_trip():
    z = np.array([1.0 + 2.0j, -3.0 + 0.5j])
    assert np.array_equal(deinterleave_complex(interleave_complex(z)), z)


def test_validate_rejects_malformed_blocks():
    bad_exp = ConicProgram(
        n_vars=1, objective=np.array([1.0]),
        blocks=[ConeBlock("exp", sp.csr_matrix((2, 1)), np.zeros(2))])
    with pytest.raises(ValueError):
        bad_exp.validate()
    bad_tag = ConicProgram(
        n_vars=1, objective=np.array([1.0]),
        blocks=[ConeBlock("cube", sp.csr_matrix((1, 1)), np.zeros(1))])
    with pytest.raises(ValueError):
        bad_tag.validate()
    bad_dim = ConicProgram(
        n_vars=2, objective=np.array([1.0]),
        blocks=[])
    with pytest.raises(ValueError):
        bad_dim.validate()


def test_builder_rejects_unknown_cone():
    b = ProgramBuilder()
    with pytest.raises(ValueError):
        b.block("simplex")


def test_dump_structure():
    b = ProgramBuilder()
    x = b.real_var()
    b.add_objective(x, 2.0)
    with b.block("nonneg") as blk:
        blk.row(x, 1.0, 0.5)
    text = dump(b.finish())
    lines = text.strip().split("\n")
    assert lines[0] == "n 1"
    assert lines[1].startswith("max ")
    assert lines[2].startswith("nonneg b: 0.5 A: 1.0")
