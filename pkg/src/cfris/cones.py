"""Cone-program abstraction for the convex SCA subproblems.

A program is a linear objective (maximize c^T x over real x) plus blocks of
affine-in-cone constraints A x + b in K, with K one of: zero, nonneg,
second-order (soc), rotated second-order (rsoc), exponential (exp). Complex
model quantities enter through an interleaved (real, imag) embedding built by
`ProgramBuilder.`

Solving delegates to the Clarabel interior-point solver; rotated cones are
lowered to plain second-order cones first. Cone conventions:

  soc  rows (t, y...)      : ||y|| <= t
  rsoc rows (u, v, y...)   : u v >= ||y||^2, u >= 0, v >= 0
  exp  rows (x, y, z)      : y exp(x / y) <= z, y > 0

Canonical encodings used by the optimizer:
  w <= log2(1 + s)  ->  exp block (w ln 2, 1, 1 + s)
  s <= sqrt(t)      ->  rsoc block (t, 1, s)
  ||Ax + b||^2 <= c^T x + d  ->  rsoc block (c^T x + d, 1, Ax + b)
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

import clarabel

CONES = ("zero", "nonneg", "soc", "rsoc", "exp")


@dataclass
class ConeBlock:
    cone: str
    a: sp.csr_matrix  # (rows, n)
    b: np.ndarray  # (rows,)


@dataclass
class ConicProgram:
    """maximize objective @ x subject to block.a @ x + block.b in block.cone."""

    n_vars: int
    objective: np.ndarray
    blocks: list

    def validate(self) -> None:
        if len(self.objective) != self.n_vars:
            raise ValueError("objective length does not match variable count")
        for blk in self.blocks:
            if blk.cone not in CONES:
                raise ValueError(f"unknown cone tag {blk.cone!r}")
            rows = blk.a.shape[0]
            if blk.a.shape[1] != self.n_vars or len(blk.b) != rows:
                raise ValueError("block dimensions do not match program")
            if blk.cone == "exp" and rows != 3:
                raise ValueError("exponential cone blocks must have exactly 3 rows")
            if blk.cone == "soc" and rows < 2:
                raise ValueError("second-order cone blocks need >= 2 rows")
            if blk.cone == "rsoc" and rows < 3:
                raise ValueError("rotated cone blocks need >= 3 rows")


@dataclass
class ConicSolution:
    status: str  # optimal | infeasible | unbounded | max-iter | numerical-failure
    x: np.ndarray | None
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int


_STATUS_MAP = {
    "Solved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
    "MaxIterations": "max-iter",
    "MaxTime": "max-iter",
    "AlmostSolved": "max-iter",
}


def _rsoc_to_soc(block: ConeBlock) -> ConeBlock:
    """(u, v, y) with u v >= ||y||^2  ->  || (u - v, 2y) || <= u + v."""
    rows = block.a.shape[0]
    lift = sp.lil_matrix((rows, rows))
    lift[0, 0] = 1.0
    lift[0, 1] = 1.0
    lift[1, 0] = 1.0
    lift[1, 1] = -1.0
    for i in range(2, rows):
        lift[i, i] = 2.0
    lift = lift.tocsr()
    return ConeBlock("soc", (lift @ block.a).tocsr(), lift @ block.b)


def solve(program: ConicProgram, tol: float = 1e-7, max_iter: int = 200,
          initial_point: np.ndarray | None = None) -> ConicSolution:
    """Solve the cone program; never raises on numerical breakdown.

    `initial_point` is accepted as a hint; the interior-point backend does
    not consume warm starts, so it is ignored.
    """
    program.validate()
    del initial_point

    mats, offsets, cones = [], [], []
    for blk in program.blocks:
        if blk.cone == "rsoc":
            blk = _rsoc_to_soc(blk)
        mats.append(blk.a)
        offsets.append(blk.b)
        rows = blk.a.shape[0]
        if blk.cone == "zero":
            cones.append(clarabel.ZeroConeT(rows))
        elif blk.cone == "nonneg":
            cones.append(clarabel.NonnegativeConeT(rows))
        elif blk.cone == "soc":
            cones.append(clarabel.SecondOrderConeT(rows))
        else:
            cones.append(clarabel.ExponentialConeT())

    n = program.n_vars
    # Clarabel form: min q^T x  s.t.  A x + s = b, s in K  <=>  b - A x in K.
    a_full = (-sp.vstack(mats)).tocsc() if mats else sp.csc_matrix((0, n))
    b_full = np.concatenate(offsets) if offsets else np.zeros(0)
    p_mat = sp.csc_matrix((n, n))
    q = -np.asarray(program.objective, dtype=float)

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = int(max_iter)
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol

    try:
        solver = clarabel.DefaultSolver(p_mat, q, a_full, b_full, cones, settings)
        result = solver.solve()
    except BaseException:
        return ConicSolution("numerical-failure", None, float("nan"),
                             float("inf"), float("inf"), 0)

    status = _STATUS_MAP.get(str(result.status), "numerical-failure")
    x = np.asarray(result.x, dtype=float) if result.x is not None else None
    if x is not None and not np.all(np.isfinite(x)):
        x, status = None, "numerical-failure"
    achieved = float(program.objective @ x) if x is not None else float("nan")
    return ConicSolution(status=status, x=x, objective=achieved,
                         primal_residual=float(result.r_prim),
                         dual_residual=float(result.r_dual),
                         iterations=int(result.iterations))


def dump(program: ConicProgram, stream=None) -> str:
    """Plain-text dump, one cone block per line, for offline cross-checks.

    Format: first line `n <vars>`, second `max <c values>`, then per block
    `<cone> b: <values> A: <row>|<row>|...` with dense rows.
    """
    out = stream or io.StringIO()
    out.write(f"n {program.n_vars}\n")
    out.write("max " + " ".join(repr(float(v)) for v in program.objective) + "\n")
    for blk in program.blocks:
        dense = blk.a.toarray()
        rows = "|".join(" ".join(repr(float(v)) for v in row) for row in dense)
        out.write(f"{blk.cone} b: " + " ".join(repr(float(v)) for v in blk.b)
                  + " A: " + rows + "\n")
    return out.getvalue() if stream is None else ""


# ---- complex-to-real embedding ----


def embed_complex_quadratic(weights: np.ndarray, offsets=None):
    """Real rows for a stack of complex linear forms e_i = a_i^H z + b_i over
    the interleaved variable ordering (Re z_0, Im z_0, Re z_1, ...).

    `weights` is (rows, n) complex (each row holds conj(a_i)); `offsets` is
    (rows,) complex or None. Returns (A, b) real of shape (2 rows, 2 n) and
    (2 rows,) with consecutive (Re, Im) row pairs, so that
    ||A x + b||^2 == sum_i |a_i^H z + b_i|^2 exactly. Feeding these rows into
    a second-order or rotated cone block therefore encodes the complex
    quadratic |a^H z + b|^2 <= t without leaving real arithmetic.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=complex))
    rows, n = weights.shape
    if offsets is None:
        offsets = np.zeros(rows, dtype=complex)
    offsets = np.asarray(offsets, dtype=complex)
    a = np.zeros((2 * rows, 2 * n))
    a[0::2, 0::2] = weights.real
    a[0::2, 1::2] = -weights.imag
    a[1::2, 0::2] = weights.imag
    a[1::2, 1::2] = weights.real
    b = np.empty(2 * rows)
    b[0::2] = offsets.real
    b[1::2] = offsets.imag
    return a, b


def complex_expression_rows(weights: np.ndarray, offset: complex = 0.0):
    """Real and imaginary rows of e = sum_i weights[i] * z_i + offset over the
    interleaved real vector (Re z_0, Im z_0, Re z_1, ...).

    Returns (A, b) with A of shape (2, 2 n): row 0 evaluates Re(e), row 1
    Im(e). Evaluating |e|^2 from these rows reproduces complex arithmetic.
    """
    weights = np.asarray(weights, dtype=complex)
    n = weights.size
    a = np.zeros((2, 2 * n))
    a[0, 0::2] = weights.real
    a[0, 1::2] = -weights.imag
    a[1, 0::2] = weights.imag
    a[1, 1::2] = weights.real
    return a, np.array([np.real(offset), np.imag(offset)])


def interleave_complex(z: np.ndarray) -> np.ndarray:
    """Complex vector -> interleaved real vector (Re, Im, Re, Im, ...)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def deinterleave_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of `interleave_complex`."""
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


class ProgramBuilder:
    """Incremental construction of a ConicProgram over mixed real/complex
    variables. Complex vectors occupy interleaved (re, im) slot pairs."""

    def __init__(self):
        self.n = 0
        self._obj = {}
        self.blocks: list = []

    # -- variables --

    def real_var(self, count: int = 1) -> np.ndarray:
        """Allocate real scalars; returns their column indices."""
        idx = np.arange(self.n, self.n + count)
        self.n += count
        return idx

    def complex_var(self, count: int) -> "ComplexSlots":
        start = self.n
        self.n += 2 * count
        return ComplexSlots(start=start, size=count)

    # -- objective --

    def add_objective(self, cols, coeffs) -> None:
        for c, v in zip(np.atleast_1d(cols), np.atleast_1d(coeffs)):
            self._obj[int(c)] = self._obj.get(int(c), 0.0) + float(v)

    def add_objective_complex(self, slots: "ComplexSlots", weights) -> None:
        """Add Re(sum_i weights[i] z_i) to the objective."""
        weights = np.asarray(weights, dtype=complex)
        for i, w in enumerate(weights):
            self.add_objective(slots.re(i), w.real)
            self.add_objective(slots.im(i), -w.imag)

    # -- constraint blocks --

    def block(self, cone: str) -> "BlockRows":
        return BlockRows(self, cone)

    def finish(self) -> ConicProgram:
        obj = np.zeros(self.n)
        for col, val in self._obj.items():
            obj[col] = val
        return ConicProgram(n_vars=self.n, objective=obj, blocks=list(self.blocks))


@dataclass(frozen=True)
class ComplexSlots:
    """Column bookkeeping for a complex vector variable."""

    start: int
    size: int

    def re(self, i: int) -> int:
        return self.start + 2 * i

    def im(self, i: int) -> int:
        return self.start + 2 * i + 1

    def value(self, x: np.ndarray) -> np.ndarray:
        """Extract the complex value from a solution vector."""
        return deinterleave_complex(x[self.start:self.start + 2 * self.size])


class BlockRows:
    """Accumulates sparse rows for one cone block."""

    def __init__(self, builder: ProgramBuilder, cone: str):
        if cone not in CONES:
            raise ValueError(f"unknown cone tag {cone!r}")
        self.builder = builder
        self.cone = cone
        self._rows = []  # list of (cols, vals) pairs
        self._offsets = []

    def row(self, cols=(), vals=(), offset: float = 0.0) -> None:
        """One real row: sum(vals * x[cols]) + offset."""
        cols = np.atleast_1d(cols).astype(int)
        vals = np.atleast_1d(vals).astype(float)
        keep = vals != 0.0
        self._rows.append((cols[keep], vals[keep]))
        self._offsets.append(float(offset))

    @staticmethod
    def _gather(parts):
        """Flatten [(slots, weights), ...] into interleaved real columns."""
        cols_re, cols_im, w = [], [], []
        for slots, weights in parts:
            weights = np.asarray(weights, dtype=complex)
            idx = np.arange(slots.size)
            cols_re.append(slots.start + 2 * idx)
            cols_im.append(slots.start + 2 * idx + 1)
            w.append(weights)
        return (np.concatenate(cols_re), np.concatenate(cols_im),
                np.concatenate(w))

    def real_part_row(self, parts, cols=(), vals=(), offset: float = 0.0) -> None:
        """One row: Re(sum over parts of w_i z_i) + sum(vals x[cols]) + offset.

        `parts` is a list of (ComplexSlots, weights) pairs, each contributing
        the real part of a complex linear form in that variable group.
        """
        cols_re, cols_im, w = self._gather(parts)
        all_cols = np.concatenate([cols_re, cols_im, np.atleast_1d(cols).astype(int)])
        all_vals = np.concatenate([w.real, -w.imag, np.atleast_1d(vals).astype(float)])
        self.row(all_cols, all_vals, offset)

    def complex_rows(self, parts, offset: complex = 0.0, scale: float = 1.0) -> None:
        """Row pair holding Re and Im of scale * (sum over parts + offset).

        Squared and summed by a second-order cone, the pair reproduces the
        complex magnitude |sum_i w_i z_i + offset|^2 exactly.
        """
        cols_re, cols_im, w = self._gather(parts)
        w = scale * w
        cols = np.concatenate([cols_re, cols_im])
        self.row(cols, np.concatenate([w.real, -w.imag]), scale * np.real(offset))
        self.row(cols, np.concatenate([w.imag, w.real]), scale * np.imag(offset))

    def close(self) -> None:
        n = self.builder.n
        data, rows_idx, cols_idx = [], [], []
        for r, (cols, vals) in enumerate(self._rows):
            rows_idx.extend([r] * len(cols))
            cols_idx.extend(cols.tolist())
            data.extend(vals.tolist())
        a = sp.csr_matrix((data, (rows_idx, cols_idx)),
                          shape=(len(self._rows), n))
        self.builder.blocks.append(ConeBlock(self.cone, a, np.array(self._offsets)))

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        return False
