"""Alternating design of AP precoders and active-RIS coefficients.

The fractional SE-EE objective is handled with a quadratic transform: for a
fixed auxiliary scalar tau the objective becomes

    2 kappa tau sqrt(SE) - kappa tau^2 P_sys + (1 - kappa) SE / P_tot,

whose maximizer over tau is sqrt(SE)/P_sys, at which point it equals the
original scalarized objective. Each outer round updates the receive filters
(MMSE), tau, then runs two inner successive-convex-approximation loops: one
over the precoders with the RIS coefficients fixed, one over the RIS
coefficients with the precoders fixed. Every inner subproblem is a cone
program (exponential cones for the rates, rotated second-order cones for the
quadratics) solved through the `cones` backend.

SINR constraints enter through a tight concave lower bound: with x the
desired-signal amplitude and psi the interference-plus-noise total, the
quotient |x|^2/psi is minorized at an expansion point by
2 Re(conj(x_bar) x)/psi_bar - (|x_bar|^2/psi_bar^2) psi, which is exact at
the expansion point and a global lower bound (convexity of |x|^2/psi). That
gives the monotone-ascent property the convergence checks rely on.

P_sys inside each subproblem objective carries every term that depends on the
active variable block (transmit power and reflected power for the precoder
step, reflected power for the RIS step), so the subproblem objective is the
transformed objective restricted to that block, up to an additive constant.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelSet, seeded_rng
from .cones import ConicProgram, ProgramBuilder, solve
from .config import SystemConfig
from .metrics import (DesignVariables, NoiseModel, ap_transmit_power,
                      composite_channel, dac_gain_vector, evaluate,
                      feasibility_residuals, p_tot, phi_block, power_ris,
                      power_static, ris_side_matrix, stacked_precoder)
from .quantization import DacModel

LN2 = math.log(2.0)
_ASCENT_GUARD = 1e-9


@dataclass
class SolverOptions:
    """Stopping rules and backend settings for the alternating solver."""

    eps_inner: float = 1e-4  # absolute change of the transformed objective
    eps_outer: float = 1e-4  # relative change of the original objective
    max_inner: int = 30
    max_outer: int = 50
    rate_continuation: bool = True
    backend_tol: float = 1e-7
    backend_max_iter: int = 200

    def __post_init__(self):
        if self.eps_inner <= 0 or self.eps_outer <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class OptimizationPlan:
    """Which constraints and power terms are active for a run.

    The defaults describe the full active-RIS design. Baselines toggle
    pieces: a passive surface drops the reflected-power constraint and its
    power draw; a random-phase baseline freezes phi at `fixed_phi`.
    """

    optimize_phi: bool = True
    enforce_min_rate: bool = True
    ris_reflect_constraint: bool = True
    include_ris_power: bool = True
    fixed_phi: np.ndarray | None = None


@dataclass
class OuterRecord:
    iteration: int
    objective: float
    se: float
    ee: float
    tau: float
    max_residual: float
    inner_precoder: int
    inner_ris: int
    wall_ms: float


@dataclass
class SolveTrace:
    """Objective history of the outer loop, one record per iteration."""

    records: list = field(default_factory=list)

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    def is_monotone(self, rel_slack: float = 1e-6) -> bool:
        vals = self.objectives()
        for prev, cur in zip(vals[:-1], vals[1:]):
            if cur < prev - rel_slack * max(1.0, abs(prev)):
                return False
        return True

    def to_csv(self, path) -> None:
        cols = ("iteration", "objective", "se", "ee", "tau", "max_residual",
                "inner_precoder", "inner_ris", "wall_ms")
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.records:
                row = [str(r.iteration), repr(r.objective), repr(r.se),
                       repr(r.ee), repr(r.tau), repr(r.max_residual),
                       str(r.inner_precoder), str(r.inner_ris), repr(r.wall_ms)]
                fh.write(",".join(row) + "\n")


@dataclass
class OptimizeResult:
    design: DesignVariables
    trace: SolveTrace
    metrics: object
    rate_infeasible: bool
    converged: bool


@dataclass
class AlternatingState:
    """Shared context of one optimization run; `dv` is mutated in place."""

    channels: ChannelSet
    config: SystemConfig
    dac: DacModel
    noise: NoiseModel
    plan: OptimizationPlan
    dv: DesignVariables
    p_tot: float
    rate_infeasible: bool = False


# ---- receive filters and the transform variable ----


def mmse_filters(channels: ChannelSet, f: np.ndarray, phi: np.ndarray,
                 dac: DacModel, noise: NoiseModel) -> np.ndarray:
    """Unit-norm linear receive filters minimizing per-user MSE.

    Inverts the per-(user, subcarrier) receive covariance: co-scheduled
    streams, DAC distortion, amplified RIS noise, and receiver noise.
    """
    q_count, l_count, b_count, m, _ = channels.g.shape
    k_count, nu = channels.w.shape[1], channels.w.shape[4]
    omega = np.zeros((k_count, b_count, nu), dtype=complex)
    for k in range(k_count):
        for b in range(b_count):
            jh = [composite_channel(channels, phi, q, k, b)
                  for q in range(q_count)]
            cov = noise.sigma2_user[k, b] * np.eye(nu, dtype=complex)
            for kk in range(k_count):
                a = sum(dac.lam[q] * (jh[q] @ f[q, kk, b]) for q in range(q_count))
                cov += np.outer(a, a.conj())
            for q in range(q_count):
                s_diag = dac.alpha[q] * np.sum(np.abs(f[q, :, b, :]) ** 2, axis=0)
                cov += (jh[q] * s_diag[None, :]) @ jh[q].conj().T
            for l in range(l_count):
                w_l = channels.w[l, k, b]
                amp2 = np.abs(phi_block(phi, l, m)) ** 2
                cov += noise.sigma2_ris[l] * (w_l.conj().T @ (amp2[:, None] * w_l))
            v = sum(jh[q] @ f[q, k, b] for q in range(q_count))
            raw = np.linalg.solve(cov, v).conj()
            norm = np.linalg.norm(raw)
            if norm > 0:
                omega[k, b] = raw / norm
            else:
                omega[k, b] = np.eye(nu)[0]
    return omega


def update_tau(se: float, p_sys: float) -> float:
    """Closed-form maximizer of 2 tau sqrt(se) - tau^2 p_sys."""
    if p_sys <= 0:
        raise ValueError("system power must be positive")
    if se < 0:
        raise ValueError("spectral efficiency cannot be negative")
    return math.sqrt(se) / p_sys


def transformed_objective(channels: ChannelSet, dv: DesignVariables,
                          config: SystemConfig, dac: DacModel, noise: NoiseModel,
                          include_ris_power: bool = True) -> float:
    """Quadratic-transform objective at the design point, using dv.tau."""
    met = evaluate(channels, dv, config, dac, noise, include_ris_power)
    kp = config.kappa
    return (2.0 * kp * dv.tau * math.sqrt(met.se)
            - kp * dv.tau ** 2 * met.power.p_sys
            + (1.0 - kp) * met.se / met.power.p_tot)


# ---- precoder step ----


@dataclass
class PrecoderExpansion:
    """Tight lower-bound data for one user's SINR as a function of the
    precoders, expanded at a reference point."""

    k: int
    b: int
    rows: np.ndarray  # (Q, Nt) filter-through-channel row per AP
    lam: np.ndarray  # (Q,) DAC gains
    alpha: np.ndarray  # (Q,) DAC distortion factors
    x_bar: complex  # desired amplitude at the expansion point
    psi_bar: float  # denominator at the expansion point
    beta: float  # curvature weight |x_bar|^2 / psi_bar^2
    noise_const: float  # precoder-independent denominator part

    def signal(self, f: np.ndarray, k: int | None = None) -> complex:
        k = self.k if k is None else k
        return sum(self.lam[q] * (self.rows[q] @ f[q, k, self.b])
                   for q in range(len(self.rows)))

    def denominator(self, f: np.ndarray) -> float:
        k_count = f.shape[1]
        inter = sum(abs(self.signal(f, kk)) ** 2
                    for kk in range(k_count) if kk != self.k)
        quant = 0.0
        for q in range(len(self.rows)):
            for kk in range(k_count):
                quant += self.alpha[q] * float(
                    np.sum(np.abs(self.rows[q] * f[q, kk, self.b]) ** 2))
        return float(inter + quant + self.noise_const)

    def value(self, f: np.ndarray) -> float:
        lin = 2.0 * np.real(np.conj(self.x_bar) * self.signal(f)) / self.psi_bar
        return float(lin - self.beta * self.denominator(f))


def precoder_surrogate(channels: ChannelSet, dv: DesignVariables,
                       noise: NoiseModel, dac: DacModel, k: int, b: int) -> PrecoderExpansion:
    """SINR lower-bound data in the precoders, tight at dv.f."""
    q_count, k_count = channels.g.shape[0], channels.w.shape[1]
    m = channels.g.shape[3]
    rows = np.array([dv.omega[k, b] @ composite_channel(channels, dv.phi, q, k, b)
                     for q in range(q_count)])
    ris_noise = 0.0
    for l in range(channels.g.shape[1]):
        filt = dv.omega[k, b] @ channels.w[l, k, b].conj().T
        ris_noise += noise.sigma2_ris[l] * float(
            np.sum(np.abs(filt * np.conj(phi_block(dv.phi, l, m))) ** 2))
    noise_const = ris_noise + float(np.sum(np.abs(dv.omega[k, b]) ** 2)) \
        * noise.sigma2_user[k, b]

    exp = PrecoderExpansion(k=k, b=b, rows=rows, lam=dac.lam, alpha=dac.alpha,
                            x_bar=0j, psi_bar=1.0, beta=0.0,
                            noise_const=noise_const)
    exp.x_bar = complex(exp.signal(dv.f))
    exp.psi_bar = exp.denominator(dv.f)
    if exp.psi_bar <= 0:
        raise ValueError("SINR denominator must be positive at the expansion point")
    exp.beta = abs(exp.x_bar) ** 2 / exp.psi_bar ** 2
    return exp


@dataclass
class PrecoderProblem:
    """Cone program for one precoder step plus variable bookkeeping."""

    program: ConicProgram
    f_slots: dict
    sinr_cols: np.ndarray
    shape: tuple
    objective_offset: float

    def extract(self, x: np.ndarray) -> np.ndarray:
        f = np.zeros(self.shape, dtype=complex)
        for key, slots in self.f_slots.items():
            f[key] = slots.value(x)
        return f


def build_precoder_subproblem(channels: ChannelSet, phi: np.ndarray,
                              omega: np.ndarray, tau: float, f_ref: np.ndarray,
                              config: SystemConfig, dac: DacModel | None = None,
                              noise: NoiseModel | None = None,
                              plan: OptimizationPlan | None = None,
                              floor_scale: float = 1.0,
                              p_tot_value: float | None = None) -> PrecoderProblem:
    """Convex restriction of the transformed problem to the precoders.

    Variables: real-embedded precoders, per-(user, subcarrier) SINR
    auxiliaries and rate epigraphs, a square-root epigraph for the transform
    term, per-AP transmit-power epigraphs, and per-RIS reflected-power
    epigraphs. The SINR constraints use the expansion at f_ref.
    """
    dac = dac or DacModel.from_bits(config.bits_per_ap)
    noise = noise or NoiseModel.from_config(config)
    plan = plan or OptimizationPlan()
    q_count, l_count, b_count, m, nt = channels.g.shape
    k_count = channels.w.shape[1]
    pt = p_tot_value if p_tot_value is not None else p_tot(config, plan.include_ris_power)
    kp = config.kappa
    dv_ref = DesignVariables(f_ref, phi, omega, tau)

    builder = ProgramBuilder()
    f_slots = {}
    for q in range(q_count):
        for k in range(k_count):
            for b in range(b_count):
                f_slots[(q, k, b)] = builder.complex_var(nt)
    sinr_cols = builder.real_var(k_count * b_count)
    rate_cols = builder.real_var(k_count * b_count)
    root_col = builder.real_var(1)[0]
    ap_cols = builder.real_var(q_count)
    need_ris = l_count > 0 and (plan.include_ris_power or plan.ris_reflect_constraint)
    ris_cols = builder.real_var(l_count) if need_ris else np.array([], dtype=int)

    builder.add_objective(root_col, 2.0 * kp * tau)
    for col in rate_cols:
        builder.add_objective(col, (1.0 - kp) / pt)
    power_coef = -kp * tau * tau
    for q in range(q_count):
        builder.add_objective(ap_cols[q], power_coef / config.eta_ap)
    if need_ris and plan.include_ris_power:
        for l in range(l_count):
            builder.add_objective(ris_cols[l], power_coef / config.eta_ris)
    offset = power_coef * power_static(config)

    # rate epigraphs: rate <= log2(1 + sinr_aux)
    for i in range(k_count * b_count):
        with builder.block("exp") as blk:
            blk.row([rate_cols[i]], [LN2], 0.0)
            blk.row([], [], 1.0)
            blk.row([sinr_cols[i]], [1.0], 1.0)
    # square-root epigraph: root^2 <= sum of rates
    with builder.block("rsoc") as blk:
        blk.row(rate_cols, np.ones(len(rate_cols)), 0.0)
        blk.row([], [], 1.0)
        blk.row([root_col], [1.0], 0.0)

    # SINR lower bounds at the expansion point
    floors = []
    for k in range(k_count):
        for b in range(b_count):
            exp = precoder_surrogate(channels, dv_ref, noise, dac, k, b)
            i = k * b_count + b
            lin = 2.0 * np.conj(exp.x_bar) / exp.psi_bar
            sqb = math.sqrt(exp.beta)
            with builder.block("rsoc") as blk:
                parts = [(f_slots[(q, k, b)], lin * exp.lam[q] * exp.rows[q])
                         for q in range(q_count)]
                blk.real_part_row(parts, cols=[sinr_cols[i]], vals=[-1.0],
                                  offset=-exp.beta * exp.noise_const)
                blk.row([], [], 1.0)
                for kk in range(k_count):
                    if kk == k:
                        continue
                    blk.complex_rows([(f_slots[(q, kk, b)], exp.lam[q] * exp.rows[q])
                                      for q in range(q_count)], scale=sqb)
                for q in range(q_count):
                    root_alpha = math.sqrt(exp.alpha[q])
                    if root_alpha == 0.0:
                        continue
                    for kk in range(k_count):
                        for t in range(nt):
                            w = np.zeros(nt, dtype=complex)
                            w[t] = root_alpha * exp.rows[q][t]
                            blk.complex_rows([(f_slots[(q, kk, b)], w)], scale=sqb)
            if plan.enforce_min_rate and floor_scale > 0 and config.min_rate > 0:
                floor = 2.0 ** (floor_scale * config.min_rate) - 1.0
                floors.append((sinr_cols[i], floor))

    # transmit power per AP
    for q in range(q_count):
        with builder.block("rsoc") as blk:
            blk.row([ap_cols[q]], [1.0], 0.0)
            blk.row([], [], 1.0)
            for k in range(k_count):
                for b in range(b_count):
                    for t in range(nt):
                        w = np.zeros(nt, dtype=complex)
                        w[t] = 1.0
                        blk.complex_rows([(f_slots[(q, k, b)], w)])

    # reflected power per RIS, quadratic in the precoders with phi fixed
    if need_ris:
        for l in range(l_count):
            refl = np.conj(phi_block(phi, l, m))
            thermal = noise.sigma2_ris[l] * float(np.sum(np.abs(refl) ** 2))
            with builder.block("rsoc") as blk:
                blk.row([ris_cols[l]], [1.0], -thermal)
                blk.row([], [], 1.0)
                for b in range(b_count):
                    for q in range(q_count):
                        g = channels.g[q, l, b]
                        for k in range(k_count):
                            for mm in range(m):
                                blk.complex_rows([(f_slots[(q, k, b)],
                                                   dac.lam[q] * refl[mm] * g[mm, :])])
                        if dac.alpha[q] > 0:
                            w2 = np.sum(np.abs(refl[:, None] * g) ** 2, axis=0)
                            for k in range(k_count):
                                for t in range(nt):
                                    w = np.zeros(nt, dtype=complex)
                                    w[t] = math.sqrt(dac.alpha[q] * w2[t])
                                    blk.complex_rows([(f_slots[(q, k, b)], w)])

    # linear caps and rate floors
    with builder.block("nonneg") as blk:
        for q in range(q_count):
            blk.row([ap_cols[q]], [-1.0], config.p_ap_max[q])
        if need_ris and plan.ris_reflect_constraint:
            for l in range(l_count):
                blk.row([ris_cols[l]], [-1.0],
                        config.eta_ris * config.p_ris_max[l])
        for col, floor in floors:
            blk.row([col], [1.0], -floor)

    return PrecoderProblem(program=builder.finish(), f_slots=f_slots,
                           sinr_cols=sinr_cols,
                           shape=(q_count, k_count, b_count, nt),
                           objective_offset=offset)


def _rates_meet_floor(state: AlternatingState, floor_scale: float) -> bool:
    met = evaluate(state.channels, state.dv, state.config, state.dac,
                   state.noise, state.plan.include_ris_power)
    floor = floor_scale * state.config.min_rate
    return bool(np.all(met.rate >= floor - 1e-9))


def _rate_continuation(state: AlternatingState, opts: SolverOptions):
    """Walk the rate floor up from zero, re-expanding at each feasible rung.

    Returns (final floor scale, subproblems adopted). If the full floor stays
    infeasible the caller turns rate enforcement off and flags the run.
    """
    adopted = 0
    for scale in (0.0, 0.25, 0.5, 0.75, 1.0):
        prob = build_precoder_subproblem(
            state.channels, state.dv.phi, state.dv.omega, state.dv.tau,
            state.dv.f, state.config, dac=state.dac, noise=state.noise,
            plan=state.plan, floor_scale=scale, p_tot_value=state.p_tot)
        sol = solve(prob.program, opts.backend_tol, opts.backend_max_iter)
        if sol.status == "optimal" and sol.x is not None:
            state.dv.f = prob.extract(sol.x)
            adopted += 1
            if scale == 1.0:
                return 1.0, adopted
        else:
            return 0.0, adopted
    return 1.0, adopted


def solve_precoders(state: AlternatingState, opts: SolverOptions) -> int:
    """Inner SCA loop over the precoders; mutates state.dv.f. Returns the
    number of accepted subproblem steps."""
    plan, config = state.plan, state.config
    t_prev = transformed_objective(state.channels, state.dv, config, state.dac,
                                   state.noise, plan.include_ris_power)
    floor_scale = 1.0 if (plan.enforce_min_rate and not state.rate_infeasible
                          and config.min_rate > 0) else 0.0
    inner = 0
    first = True
    while inner < opts.max_inner:
        prob = build_precoder_subproblem(
            state.channels, state.dv.phi, state.dv.omega, state.dv.tau,
            state.dv.f, config, dac=state.dac, noise=state.noise, plan=plan,
            floor_scale=floor_scale, p_tot_value=state.p_tot)
        sol = solve(prob.program, opts.backend_tol, opts.backend_max_iter)
        if sol.status != "optimal" or sol.x is None:
            repairable = (sol.status == "infeasible" and first
                          and floor_scale > 0 and opts.rate_continuation
                          and not _rates_meet_floor(state, floor_scale))
            if repairable:
                floor_scale, adopted = _rate_continuation(state, opts)
                inner += adopted
                first = False
                if floor_scale == 0.0:
                    state.rate_infeasible = True
                t_prev = transformed_objective(state.channels, state.dv, config,
                                               state.dac, state.noise,
                                               plan.include_ris_power)
                continue
            break
        candidate = DesignVariables(prob.extract(sol.x), state.dv.phi,
                                    state.dv.omega, state.dv.tau)
        t_new = transformed_objective(state.channels, candidate, config,
                                      state.dac, state.noise,
                                      plan.include_ris_power)
        if t_new < t_prev - _ASCENT_GUARD * max(1.0, abs(t_prev)):
            break
        state.dv.f = candidate.f
        inner += 1
        first = False
        if abs(t_new - t_prev) < opts.eps_inner:
            break
        t_prev = t_new
    return inner


# ---- RIS step ----


@dataclass
class RisExpansion:
    """Tight lower-bound data for one user's SINR as a function of the
    stacked RIS coefficients, expanded at a reference point."""

    k: int
    b: int
    targets: np.ndarray  # (K, L*M) per-user reflected signal directions
    u_mat: np.ndarray  # (L*M, Q*Nt) filter-weighted AP-to-RIS map
    quant_diag: np.ndarray  # (Q*Nt,) stacked distortion covariance diagonal
    noise_diag: np.ndarray  # (L*M,) amplified thermal-noise weights
    x_bar: complex
    psi_bar: float
    beta: float
    noise_const: float  # receiver noise, phi-independent

    def signal(self, phi: np.ndarray, k: int | None = None) -> complex:
        k = self.k if k is None else k
        return complex(np.vdot(phi, self.targets[k]))

    def denominator(self, phi: np.ndarray) -> float:
        inter = sum(abs(self.signal(phi, kk)) ** 2
                    for kk in range(self.targets.shape[0]) if kk != self.k)
        through = self.u_mat.conj().T @ phi
        quant = float(np.sum(self.quant_diag * np.abs(through) ** 2))
        thermal = float(np.sum(self.noise_diag * np.abs(phi) ** 2))
        return float(inter + quant + thermal + self.noise_const)

    def value(self, phi: np.ndarray) -> float:
        lin = 2.0 * np.real(np.conj(self.x_bar) * self.signal(phi)) / self.psi_bar
        return float(lin - self.beta * self.denominator(phi))


def ris_surrogate(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
                  dac: DacModel, k: int, b: int) -> RisExpansion:
    """SINR lower-bound data in the RIS coefficients, tight at dv.phi."""
    q_count, l_count, _, m, nt = channels.g.shape
    k_count = channels.w.shape[1]
    u = ris_side_matrix(channels, dv.omega[k, b], k, b)
    gain = dac_gain_vector(dac, nt)
    targets = np.array([u @ (gain * stacked_precoder(dv, kk, b))
                        for kk in range(k_count)])
    quant_diag = np.concatenate([
        dac.alpha[q] * np.sum(np.abs(dv.f[q, :, b, :]) ** 2, axis=0)
        for q in range(q_count)])
    w_stack = np.vstack([channels.w[l, k, b] for l in range(l_count)])
    filt = dv.omega[k, b] @ w_stack.conj().T
    noise_diag = np.repeat(noise.sigma2_ris, m) * np.abs(filt) ** 2
    noise_const = float(np.sum(np.abs(dv.omega[k, b]) ** 2)) * noise.sigma2_user[k, b]

    exp = RisExpansion(k=k, b=b, targets=targets, u_mat=u, quant_diag=quant_diag,
                       noise_diag=noise_diag, x_bar=0j, psi_bar=1.0, beta=0.0,
                       noise_const=noise_const)
    exp.x_bar = exp.signal(dv.phi)
    exp.psi_bar = exp.denominator(dv.phi)
    if exp.psi_bar <= 0:
        raise ValueError("SINR denominator must be positive at the expansion point")
    exp.beta = abs(exp.x_bar) ** 2 / exp.psi_bar ** 2
    return exp


@dataclass
class RisProblem:
    """Cone program for one RIS step plus variable bookkeeping."""

    program: ConicProgram
    phi_slots: object
    sinr_cols: np.ndarray
    objective_offset: float

    def extract(self, x: np.ndarray) -> np.ndarray:
        return self.phi_slots.value(x)


def build_ris_subproblem(channels: ChannelSet, f: np.ndarray, omega: np.ndarray,
                         tau: float, phi_ref: np.ndarray, config: SystemConfig,
                         dac: DacModel | None = None,
                         noise: NoiseModel | None = None,
                         plan: OptimizationPlan | None = None,
                         floor_scale: float = 1.0,
                         p_tot_value: float | None = None) -> RisProblem:
    """Convex restriction of the transformed problem to the RIS coefficients.

    The reflected power is a pure diagonal quadratic in phi once the
    precoders are fixed, so both the power term in the objective and its cap
    compress to per-element weights.
    """
    dac = dac or DacModel.from_bits(config.bits_per_ap)
    noise = noise or NoiseModel.from_config(config)
    plan = plan or OptimizationPlan()
    q_count, l_count, b_count, m, nt = channels.g.shape
    k_count = channels.w.shape[1]
    pt = p_tot_value if p_tot_value is not None else p_tot(config, plan.include_ris_power)
    kp = config.kappa
    dv_ref = DesignVariables(f, phi_ref, omega, tau)

    builder = ProgramBuilder()
    phi_slots = builder.complex_var(l_count * m)
    sinr_cols = builder.real_var(k_count * b_count)
    rate_cols = builder.real_var(k_count * b_count)
    root_col = builder.real_var(1)[0]
    need_ris = plan.include_ris_power or plan.ris_reflect_constraint
    ris_cols = builder.real_var(l_count) if need_ris else np.array([], dtype=int)

    builder.add_objective(root_col, 2.0 * kp * tau)
    for col in rate_cols:
        builder.add_objective(col, (1.0 - kp) / pt)
    power_coef = -kp * tau * tau
    if need_ris and plan.include_ris_power:
        for l in range(l_count):
            builder.add_objective(ris_cols[l], power_coef / config.eta_ris)
    transmit = sum(ap_transmit_power(f, q) for q in range(q_count)) / config.eta_ap
    offset = power_coef * (transmit + power_static(config))

    for i in range(k_count * b_count):
        with builder.block("exp") as blk:
            blk.row([rate_cols[i]], [LN2], 0.0)
            blk.row([], [], 1.0)
            blk.row([sinr_cols[i]], [1.0], 1.0)
    with builder.block("rsoc") as blk:
        blk.row(rate_cols, np.ones(len(rate_cols)), 0.0)
        blk.row([], [], 1.0)
        blk.row([root_col], [1.0], 0.0)

    floors = []
    for k in range(k_count):
        for b in range(b_count):
            exp = ris_surrogate(channels, dv_ref, noise, dac, k, b)
            i = k * b_count + b
            lin = 2.0 * np.conj(exp.x_bar) / exp.psi_bar
            sqb = math.sqrt(exp.beta)
            with builder.block("rsoc") as blk:
                blk.real_part_row([(phi_slots, np.conj(lin * exp.targets[k]))],
                                  cols=[sinr_cols[i]], vals=[-1.0],
                                  offset=-exp.beta * exp.noise_const)
                blk.row([], [], 1.0)
                for kk in range(k_count):
                    if kk == k:
                        continue
                    blk.complex_rows([(phi_slots, np.conj(exp.targets[kk]))],
                                     scale=sqb)
                for col in range(exp.u_mat.shape[1]):
                    if exp.quant_diag[col] <= 0:
                        continue
                    blk.complex_rows([(phi_slots,
                                       math.sqrt(exp.quant_diag[col])
                                       * np.conj(exp.u_mat[:, col]))], scale=sqb)
                for j in range(l_count * m):
                    if exp.noise_diag[j] <= 0:
                        continue
                    w = np.zeros(l_count * m, dtype=complex)
                    w[j] = math.sqrt(exp.noise_diag[j])
                    blk.complex_rows([(phi_slots, w)], scale=sqb)
            if plan.enforce_min_rate and floor_scale > 0 and config.min_rate > 0:
                floor = 2.0 ** (floor_scale * config.min_rate) - 1.0
                floors.append((sinr_cols[i], floor))

    # per-element amplitude bound
    for j in range(l_count * m):
        with builder.block("soc") as blk:
            blk.row([], [], config.beta_max)
            blk.row([phi_slots.re(j)], [1.0], 0.0)
            blk.row([phi_slots.im(j)], [1.0], 0.0)

    # reflected power per RIS: diagonal quadratic in phi
    if need_ris:
        for l in range(l_count):
            weights = np.full(m, noise.sigma2_ris[l])
            for b in range(b_count):
                for q in range(q_count):
                    g = channels.g[q, l, b]
                    for k in range(k_count):
                        weights += np.abs(dac.lam[q] * (g @ f[q, k, b])) ** 2
                    if dac.alpha[q] > 0:
                        s_diag = dac.alpha[q] * np.sum(np.abs(f[q, :, b, :]) ** 2,
                                                       axis=0)
                        weights += np.abs(g) ** 2 @ s_diag
            with builder.block("rsoc") as blk:
                blk.row([ris_cols[l]], [1.0], 0.0)
                blk.row([], [], 1.0)
                for mm in range(m):
                    if weights[mm] <= 0:
                        continue
                    w = np.zeros(l_count * m, dtype=complex)
                    w[l * m + mm] = math.sqrt(weights[mm])
                    blk.complex_rows([(phi_slots, w)])

    with builder.block("nonneg") as blk:
        if need_ris and plan.ris_reflect_constraint:
            for l in range(l_count):
                blk.row([ris_cols[l]], [-1.0],
                        config.eta_ris * config.p_ris_max[l])
        for col, floor in floors:
            blk.row([col], [1.0], -floor)
        if not floors and not (need_ris and plan.ris_reflect_constraint):
            blk.row([], [], 0.0)  # keep the block non-empty

    return RisProblem(program=builder.finish(), phi_slots=phi_slots,
                      sinr_cols=sinr_cols, objective_offset=offset)


def solve_ris(state: AlternatingState, opts: SolverOptions) -> int:
    """Inner SCA loop over the RIS coefficients; mutates state.dv.phi."""
    plan, config = state.plan, state.config
    t_prev = transformed_objective(state.channels, state.dv, config, state.dac,
                                   state.noise, plan.include_ris_power)
    floor_scale = 1.0 if (plan.enforce_min_rate and not state.rate_infeasible
                          and config.min_rate > 0) else 0.0
    inner = 0
    while inner < opts.max_inner:
        prob = build_ris_subproblem(
            state.channels, state.dv.f, state.dv.omega, state.dv.tau,
            state.dv.phi, config, dac=state.dac, noise=state.noise, plan=plan,
            floor_scale=floor_scale, p_tot_value=state.p_tot)
        sol = solve(prob.program, opts.backend_tol, opts.backend_max_iter)
        if sol.status != "optimal" or sol.x is None:
            break
        candidate = DesignVariables(state.dv.f, prob.extract(sol.x),
                                    state.dv.omega, state.dv.tau)
        t_new = transformed_objective(state.channels, candidate, config,
                                      state.dac, state.noise,
                                      plan.include_ris_power)
        if t_new < t_prev - _ASCENT_GUARD * max(1.0, abs(t_prev)):
            break
        state.dv.phi = candidate.phi
        inner += 1
        if abs(t_new - t_prev) < opts.eps_inner:
            break
        t_prev = t_new
    return inner


# ---- initialization and the outer loop ----


def initialize(channels: ChannelSet, config: SystemConfig, seed: int,
               plan: OptimizationPlan | None = None,
               dac: DacModel | None = None,
               noise: NoiseModel | None = None):
    """Deterministic starting point: random RIS phases at a feasible common
    amplitude, precoders matched to the filtered composite channel at half
    the per-AP power budget.

    Construction order: draw unit-amplitude phases, compute receive filters
    against a uniform precoder seed, point each precoder along its
    filter-through-channel direction, then pick the largest common amplitude
    (capped at beta_max) that keeps every reflected-power constraint
    satisfied with those precoders.
    """
    plan = plan or OptimizationPlan()
    dac = dac or DacModel.from_bits(config.bits_per_ap)
    noise = noise or NoiseModel.from_config(config)
    q_count, l_count, b_count, m, nt = channels.g.shape
    k_count = channels.w.shape[1]

    rng = seeded_rng(seed, "phases")
    theta = rng.uniform(0.0, 2.0 * np.pi, l_count * m)
    direction = np.exp(1j * theta)
    phi_seed = plan.fixed_phi.copy() if plan.fixed_phi is not None else direction

    f_unif = np.zeros((q_count, k_count, b_count, nt), dtype=complex)
    for q in range(q_count):
        per_stream = 0.5 * config.p_ap_max[q] / (k_count * b_count)
        f_unif[q] = math.sqrt(per_stream / nt)
    omega0 = mmse_filters(channels, f_unif, phi_seed, dac, noise)

    f0 = np.zeros_like(f_unif)
    for q in range(q_count):
        per_stream = 0.5 * config.p_ap_max[q] / (k_count * b_count)
        for k in range(k_count):
            for b in range(b_count):
                row = omega0[k, b] @ composite_channel(channels, phi_seed, q, k, b)
                matched = np.conj(dac.lam[q] * row)
                norm = np.linalg.norm(matched)
                unit = matched / norm if norm > 0 else np.full(nt, 1.0 / math.sqrt(nt))
                f0[q, k, b] = math.sqrt(per_stream) * unit

    if plan.fixed_phi is not None:
        phi0 = phi_seed
        if plan.ris_reflect_constraint and l_count > 0:
            # scale the precoders down if the frozen coefficients leave no
            # headroom; the thermal part does not depend on the precoders
            shrink = 1.0
            for l in range(l_count):
                raw = power_ris(channels, f0, phi0, dac, noise, l, 1.0)
                thermal = noise.sigma2_ris[l] * float(
                    np.sum(np.abs(phi_block(phi0, l, m)) ** 2))
                budget = config.eta_ris * config.p_ris_max[l]
                if raw > budget and raw > thermal:
                    shrink = min(shrink, max(0.0, (budget - thermal))
                                 / (raw - thermal))
            if shrink < 1.0:
                f0 *= math.sqrt(shrink * 0.999)
    else:
        amp = config.beta_max
        if plan.ris_reflect_constraint and l_count > 0:
            for l in range(l_count):
                raw = power_ris(channels, f0, direction, dac, noise, l, 1.0)
                if raw > 0:
                    amp = min(amp, math.sqrt(
                        config.eta_ris * config.p_ris_max[l] / raw))
        phi0 = amp * direction
    return f0, phi0


def prepare_state(channels: ChannelSet, config: SystemConfig, seed: int = 0,
                  plan: OptimizationPlan | None = None) -> AlternatingState:
    """Initialized solver context: starting point, filters, transform value."""
    plan = plan or OptimizationPlan()
    dac = DacModel.from_bits(config.bits_per_ap)
    noise = NoiseModel.from_config(config)
    f0, phi0 = initialize(channels, config, seed, plan, dac, noise)
    omega0 = mmse_filters(channels, f0, phi0, dac, noise)
    dv = DesignVariables(f0, phi0, omega0, 0.0)
    met = evaluate(channels, dv, config, dac, noise, plan.include_ris_power)
    dv.tau = update_tau(met.se, met.power.p_sys)
    return AlternatingState(channels=channels, config=config, dac=dac,
                            noise=noise, plan=plan, dv=dv,
                            p_tot=p_tot(config, plan.include_ris_power))


def optimize(channels: ChannelSet, config: SystemConfig,
             opts: SolverOptions | None = None, seed: int = 0,
             plan: OptimizationPlan | None = None) -> OptimizeResult:
    """Alternating outer loop: receive filters, transform variable, precoder
    step, RIS step, evaluate; stop on relative objective change."""
    opts = opts or SolverOptions()
    plan = plan or OptimizationPlan()
    state = prepare_state(channels, config, seed, plan)
    dv = state.dv
    met = evaluate(channels, dv, config, state.dac, state.noise,
                   plan.include_ris_power)
    f_prev = met.objective
    trace = SolveTrace()
    converged = False
    for it in range(1, opts.max_outer + 1):
        started = time.perf_counter()
        omega_new = mmse_filters(channels, dv.f, dv.phi, state.dac, state.noise)
        candidate = DesignVariables(dv.f, dv.phi, omega_new, dv.tau)
        met_candidate = evaluate(channels, candidate, config, state.dac,
                                 state.noise, plan.include_ris_power)
        if met_candidate.objective >= met.objective - _ASCENT_GUARD * max(
                1.0, abs(met.objective)):
            dv.omega = omega_new
            met = met_candidate
        dv.tau = update_tau(met.se, met.power.p_sys)

        inner_f = solve_precoders(state, opts)
        inner_p = solve_ris(state, opts) if plan.optimize_phi else 0

        met = evaluate(channels, dv, config, state.dac, state.noise,
                       plan.include_ris_power)
        residuals = feasibility_residuals(
            channels, dv, config, state.dac, state.noise,
            enforce_min_rate=plan.enforce_min_rate and not state.rate_infeasible,
            check_ris_power=plan.ris_reflect_constraint)
        elapsed = (time.perf_counter() - started) * 1e3
        trace.records.append(OuterRecord(
            iteration=it, objective=met.objective, se=met.se, ee=met.ee,
            tau=dv.tau, max_residual=residuals.max_relative,
            inner_precoder=inner_f, inner_ris=inner_p, wall_ms=elapsed))
        if abs(met.objective - f_prev) <= opts.eps_outer * max(1.0, abs(f_prev)):
            converged = True
            break
        f_prev = met.objective
    return OptimizeResult(design=dv, trace=trace, metrics=met,
                          rate_infeasible=state.rate_infeasible,
                          converged=converged)
