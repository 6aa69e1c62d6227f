"""Evaluation of a design point: SINR, rates, SE/EE, power model, residuals.

The per-user SINR is implemented in three algebraically equivalent forms
(the direct ratio, the SCA denominator form, and the quadratic-in-phi form
used for RIS optimization); they must agree to 1e-9 relative and are
cross-checked in the validation suite. Everything here is a pure function of
immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig
from .quantization import DacModel, quantization_noise_cov


@dataclass(frozen=True)
class NoiseModel:
    """Thermal noise powers: per (user, subcarrier) and per RIS (W)."""

    sigma2_user: np.ndarray  # (K, B)
    sigma2_ris: np.ndarray  # (L,)

    @classmethod
    def from_config(cls, config: SystemConfig) -> "NoiseModel":
        sigma2 = np.full((config.n_users, config.n_subcarriers), config.noise_power)
        return cls(sigma2_user=sigma2, sigma2_ris=np.array(config.sigma2_ris_effective))


@dataclass
class DesignVariables:
    """One design point: precoders, RIS coefficients, receive filters, tau."""

    f: np.ndarray  # (Q, K, B, Nt) complex
    phi: np.ndarray  # (L*M,) complex, per-RIS blocks stacked
    omega: np.ndarray  # (K, B, Nu) complex receive rows
    tau: float = 0.0

    def copy(self) -> "DesignVariables":
        return DesignVariables(self.f.copy(), self.phi.copy(), self.omega.copy(), self.tau)


@dataclass(frozen=True)
class PowerBreakdown:
    """System power decomposition in watts."""

    p_ap: np.ndarray  # (Q,) consumed transmit power per AP
    p_ris: np.ndarray  # (L,) consumed reflect power per RIS
    p_static: float
    p_dac: float  # DAC share of p_static, informational
    p_sys: float
    p_tot: float


@dataclass(frozen=True)
class Metrics:
    """Rates and efficiencies of one evaluated design point."""

    sinr: np.ndarray  # (K, B)
    rate: np.ndarray  # (K, B) bit/s/Hz
    se: float  # bit/s/Hz
    ee: float  # bit/s/Hz/W
    objective: float
    power: PowerBreakdown


def phi_block(phi: np.ndarray, l: int, m: int) -> np.ndarray:
    """Coefficients of the l-th RIS out of the stacked vector."""
    return phi[l * m:(l + 1) * m]


def composite_channel(channels: ChannelSet, phi: np.ndarray, q: int, k: int, b: int) -> np.ndarray:
    """Effective AP-to-user channel J^H through all RIS panels (Nu x Nt)."""
    m = channels.g.shape[3]
    nu, nt = channels.w.shape[4], channels.g.shape[4]
    out = np.zeros((nu, nt), dtype=complex)
    for l in range(channels.g.shape[1]):
        reflect = np.conj(phi_block(phi, l, m))
        out += channels.w[l, k, b].conj().T @ (reflect[:, None] * channels.g[q, l, b])
    return out


def _receive_rows(channels: ChannelSet, dv: DesignVariables, k: int, b: int) -> list:
    """omega J_q^H for each AP: the row the filter sees from AP q (length Nt)."""
    w_row = dv.omega[k, b]
    return [w_row @ composite_channel(channels, dv.phi, q, k, b)
            for q in range(channels.g.shape[0])]


def _ris_noise_power(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
                     k: int, b: int) -> float:
    """Filtered RIS thermal noise: omega W^H Theta^H (sigma_v x I) Theta W omega^H."""
    m = channels.g.shape[3]
    total = 0.0
    for l in range(channels.g.shape[1]):
        row = dv.omega[k, b] @ channels.w[l, k, b].conj().T  # (M,)
        y = row * np.conj(phi_block(dv.phi, l, m))
        total += noise.sigma2_ris[l] * float(np.sum(np.abs(y) ** 2))
    return total


def sinr(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
         dac: DacModel, k: int, b: int) -> float:
    """Direct SINR ratio: desired power over interference, DAC distortion,
    amplified RIS noise, and receiver noise."""
    q_count, k_count = channels.g.shape[0], channels.w.shape[1]
    rows = _receive_rows(channels, dv, k, b)
    gains = [
        sum(dac.lam[q] * (rows[q] @ dv.f[q, kk, b]) for q in range(q_count))
        for kk in range(k_count)
    ]
    num = abs(gains[k]) ** 2
    interference = sum(abs(gains[kk]) ** 2 for kk in range(k_count) if kk != k)
    quant = 0.0
    for q in range(q_count):
        cov = quantization_noise_cov(dv.f[q, :, b], dac.alpha[q])
        quant += float(np.real(rows[q] @ cov @ rows[q].conj()))
    den = (interference + quant + _ris_noise_power(channels, dv, noise, k, b)
           + float(np.sum(np.abs(dv.omega[k, b]) ** 2)) * noise.sigma2_user[k, b])
    return float(num / den)


def sinr_sca_form(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
                  dac: DacModel, k: int, b: int) -> float:
    """SINR with the DAC distortion expanded per user: sum_{q,k'} alpha_q
    ||omega J_q^H diag(f_{q,k',b})||^2. Equals `sinr` identically."""
    q_count, k_count = channels.g.shape[0], channels.w.shape[1]
    rows = _receive_rows(channels, dv, k, b)
    gains = [
        sum(dac.lam[q] * (rows[q] @ dv.f[q, kk, b]) for q in range(q_count))
        for kk in range(k_count)
    ]
    num = abs(gains[k]) ** 2
    den = sinr_denominator(channels, dv, noise, dac, k, b)
    return float(num / den)


def sinr_denominator(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
                     dac: DacModel, k: int, b: int) -> float:
    """Interference plus distortion plus noise seen by one user, with the DAC
    distortion expanded per interfering stream."""
    q_count, k_count = channels.g.shape[0], channels.w.shape[1]
    rows = _receive_rows(channels, dv, k, b)
    interference = 0.0
    for kk in range(k_count):
        if kk == k:
            continue
        gain = sum(dac.lam[q] * (rows[q] @ dv.f[q, kk, b]) for q in range(q_count))
        interference += abs(gain) ** 2
    quant = 0.0
    for q in range(q_count):
        for kk in range(k_count):
            quant += dac.alpha[q] * float(np.sum(np.abs(rows[q] * dv.f[q, kk, b]) ** 2))
    return (interference + quant + _ris_noise_power(channels, dv, noise, k, b)
            + float(np.sum(np.abs(dv.omega[k, b]) ** 2)) * noise.sigma2_user[k, b])


def stacked_precoder(dv: DesignVariables, k: int, b: int) -> np.ndarray:
    """All AP precoders for one (user, subcarrier) as one Q*Nt vector."""
    return dv.f[:, k, b, :].reshape(-1)


def dac_gain_vector(dac: DacModel, nt: int) -> np.ndarray:
    """Per-antenna DAC gain over the stacked Q*Nt transmit dimension."""
    return np.repeat(dac.lam, nt)


def ris_side_matrix(channels: ChannelSet, omega_kb: np.ndarray, k: int, b: int) -> np.ndarray:
    """U_{k,b} = [diag(omega W^H) G_{q,b}]_q, shape (L*M, Q*Nt).

    Satisfies omega J^H = phi^H U with the stacked AP channel blocks G_{q,b}.
    """
    q_count, l_count = channels.g.shape[0], channels.g.shape[1]
    w_stack = np.vstack([channels.w[l, k, b] for l in range(l_count)])  # (L*M, Nu)
    d = omega_kb @ w_stack.conj().T  # (L*M,)
    blocks = []
    for q in range(q_count):
        g_stack = np.vstack([channels.g[q, l, b] for l in range(l_count)])  # (L*M, Nt)
        blocks.append(d[:, None] * g_stack)
    return np.hstack(blocks)


def quant_noise_diag(dv: DesignVariables, dac: DacModel, b: int) -> np.ndarray:
    """Diagonal of the block-diagonal quantization covariance at subcarrier b
    over the stacked Q*Nt transmit dimension."""
    q_count, _, _, nt = dv.f.shape
    parts = [dac.alpha[q] * np.sum(np.abs(dv.f[q, :, b, :]) ** 2, axis=0)
             for q in range(q_count)]
    return np.concatenate(parts)


def sinr_phi_form(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
                  dac: DacModel, k: int, b: int) -> float:
    """SINR evaluated through the quadratic-in-phi reformulation."""
    k_count = channels.w.shape[1]
    m = channels.g.shape[3]
    nt = channels.g.shape[4]
    u = ris_side_matrix(channels, dv.omega[k, b], k, b)
    gain = dac_gain_vector(dac, nt)
    targets = [u @ (gain * stacked_precoder(dv, kk, b)) for kk in range(k_count)]
    num = abs(np.vdot(dv.phi, targets[k])) ** 2
    interference = sum(abs(np.vdot(dv.phi, targets[kk])) ** 2
                       for kk in range(k_count) if kk != k)
    s_diag = quant_noise_diag(dv, dac, b)
    uh_phi = u.conj().T @ dv.phi
    quant = float(np.sum(s_diag * np.abs(uh_phi) ** 2))
    w_stack = np.vstack([channels.w[l, k, b] for l in range(channels.g.shape[1])])
    d = dv.omega[k, b] @ w_stack.conj().T
    sv = np.repeat(noise.sigma2_ris, m)
    ris_noise = float(np.sum(sv * np.abs(d) ** 2 * np.abs(dv.phi) ** 2))
    den = (interference + quant + ris_noise
           + float(np.sum(np.abs(dv.omega[k, b]) ** 2)) * noise.sigma2_user[k, b])
    return float(num / den)


# ---- rates and efficiencies ----


def all_sinr(channels: ChannelSet, dv: DesignVariables, noise: NoiseModel,
             dac: DacModel) -> np.ndarray:
    k_count, b_count = channels.w.shape[1], channels.g.shape[2]
    out = np.zeros((k_count, b_count))
    for k in range(k_count):
        for b in range(b_count):
            out[k, b] = sinr(channels, dv, noise, dac, k, b)
    return out


def spectral_efficiency(sinr_values: np.ndarray) -> float:
    """Sum rate over users and subcarriers, bit/s/Hz."""
    return float(np.sum(np.log2(1.0 + np.asarray(sinr_values))))


def energy_efficiency(se: float, p_sys: float) -> float:
    if p_sys <= 0:
        raise ValueError("system power must be positive")
    return se / p_sys


def objective(kappa: float, se: float, ee: float, p_tot: float) -> float:
    """Scalarized tradeoff: kappa * EE + (1 - kappa) * SE / P_tot."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    return kappa * ee + (1.0 - kappa) * se / p_tot


# ---- power model ----


def ap_transmit_power(f: np.ndarray, q: int) -> float:
    """Radiated power at AP q: sum of squared precoder norms (W)."""
    return float(np.sum(np.abs(f[q]) ** 2))


def power_ap(f: np.ndarray, q: int, eta_ap: float) -> float:
    """Consumed transmit power at AP q (amplifier efficiency applied)."""
    if not 0.0 < eta_ap <= 1.0:
        raise ValueError("eta_ap must lie in (0, 1]")
    return ap_transmit_power(f, q) / eta_ap


def power_ris(channels: ChannelSet, f: np.ndarray, phi: np.ndarray, dac: DacModel,
              noise: NoiseModel, l: int, eta_ris: float) -> float:
    """Consumed reflect power at RIS l: amplified signal, amplified DAC
    distortion, and amplified thermal noise, over the amplifier efficiency."""
    if not 0.0 < eta_ris <= 1.0:
        raise ValueError("eta_ris must lie in (0, 1]")
    q_count, _, b_count, m, _ = channels.g.shape
    k_count = channels.w.shape[1]
    reflect = np.conj(phi_block(phi, l, m))
    signal = 0.0
    quant = 0.0
    for b in range(b_count):
        for q in range(q_count):
            g = channels.g[q, l, b]
            for k in range(k_count):
                signal += float(np.sum(np.abs(reflect * (g @ (dac.lam[q] * f[q, k, b]))) ** 2))
            s_diag = dac.alpha[q] * np.sum(np.abs(f[q, :, b, :]) ** 2, axis=0)  # (Nt,)
            quant += float(np.sum(s_diag * np.sum(np.abs(reflect[:, None] * g) ** 2, axis=0)))
    thermal = noise.sigma2_ris[l] * float(np.sum(np.abs(phi_block(phi, l, m)) ** 2))
    return (signal + quant + thermal) / eta_ris


def dac_power(fs: float, bits: int) -> float:
    """Power draw of one DAC at sampling rate fs (W)."""
    bits = int(bits)
    if bits < 1:
        raise ValueError("DAC resolution must be >= 1 bit")
    return 1.5e-5 * 2.0 ** bits + 9e-12 * bits * fs


def dac_power_total(config: SystemConfig) -> float:
    """All DACs: B subcarrier chains x 2 per antenna (I/Q) x Nt x APs."""
    nt = config.n_ap_antennas
    fs = config.sampling_rate
    return config.n_subcarriers * sum(2 * nt * dac_power(fs, bits)
                                      for bits in config.bits_per_ap)


def power_static(config: SystemConfig) -> float:
    """Load-independent power: AP circuits, DACs, user terminals, backhaul,
    RIS control and bias."""
    nt = config.n_ap_antennas
    circuits = nt * sum(config.p_ap_circuit)
    users = sum(config.p_user_circuit)
    backhaul = sum(config.p_backhaul)
    ris = config.n_ris * config.n_ris_elements * (config.p_ris_switch + config.p_ris_bias)
    return circuits + dac_power_total(config) + users + backhaul + ris


def p_tot(config: SystemConfig, include_ris_power: bool = True) -> float:
    """Fixed scaling budget: all power caps at full draw plus static power."""
    total = sum(config.p_ap_max) / config.eta_ap + power_static(config)
    if include_ris_power:
        total += sum(config.p_ris_max) / config.eta_ris
    return total


def power_breakdown(channels: ChannelSet, dv: DesignVariables, dac: DacModel,
                    noise: NoiseModel, config: SystemConfig,
                    include_ris_power: bool = True) -> PowerBreakdown:
    """Full system power decomposition at one design point.

    With include_ris_power=False (passive-RIS accounting) the reflect power
    is treated as zero in both p_sys and p_tot.
    """
    q_count, l_count = config.n_aps, config.n_ris
    p_ap = np.array([power_ap(dv.f, q, config.eta_ap) for q in range(q_count)])
    if include_ris_power:
        p_ris = np.array([power_ris(channels, dv.f, dv.phi, dac, noise, l, config.eta_ris)
                          for l in range(l_count)])
    else:
        p_ris = np.zeros(l_count)
    static = power_static(config)
    p_sys = float(np.sum(p_ap) + np.sum(p_ris) + static)
    return PowerBreakdown(
        p_ap=p_ap, p_ris=p_ris, p_static=static, p_dac=dac_power_total(config),
        p_sys=p_sys, p_tot=p_tot(config, include_ris_power))


def evaluate(channels: ChannelSet, dv: DesignVariables, config: SystemConfig,
             dac: DacModel | None = None, noise: NoiseModel | None = None,
             include_ris_power: bool = True) -> Metrics:
    """Metrics at a design point, recomputed from first principles."""
    dac = dac or DacModel.from_bits(config.bits_per_ap)
    noise = noise or NoiseModel.from_config(config)
    sinr_values = all_sinr(channels, dv, noise, dac)
    rates = np.log2(1.0 + sinr_values)
    se = float(np.sum(rates))
    power = power_breakdown(channels, dv, dac, noise, config, include_ris_power)
    ee = energy_efficiency(se, power.p_sys)
    return Metrics(sinr=sinr_values, rate=rates, se=se, ee=ee,
                   objective=objective(config.kappa, se, ee, power.p_tot),
                   power=power)


# ---- feasibility ----


@dataclass(frozen=True)
class Residuals:
    """Constraint violations, max(0, excess); zero means satisfied."""

    ap_power: np.ndarray  # (Q,) W
    ris_power: np.ndarray  # (L,) W
    modulus: np.ndarray  # (L*M,)
    rate: np.ndarray  # (K, B) bit/s/Hz
    ap_scale: np.ndarray
    ris_scale: np.ndarray
    modulus_scale: float
    rate_scale: float

    @property
    def max_absolute(self) -> float:
        parts = [self.ap_power.max(initial=0.0), self.ris_power.max(initial=0.0),
                 self.modulus.max(initial=0.0), self.rate.max(initial=0.0)]
        return float(max(parts))

    @property
    def max_relative(self) -> float:
        parts = [
            float(np.max(self.ap_power / self.ap_scale, initial=0.0)),
            float(np.max(self.ris_power / self.ris_scale, initial=0.0)),
            float(np.max(self.modulus / self.modulus_scale, initial=0.0)),
            float(np.max(self.rate / self.rate_scale, initial=0.0)),
        ]
        return float(max(parts))


def feasibility_residuals(channels: ChannelSet, dv: DesignVariables,
                          config: SystemConfig, dac: DacModel | None = None,
                          noise: NoiseModel | None = None,
                          enforce_min_rate: bool = True,
                          check_ris_power: bool = True) -> Residuals:
    """Violations of the power, amplitude, and minimum-rate constraints.

    Rates are recomputed here from the design point; solver-internal claims
    are never trusted.
    """
    dac = dac or DacModel.from_bits(config.bits_per_ap)
    noise = noise or NoiseModel.from_config(config)
    q_count, l_count = config.n_aps, config.n_ris

    ap = np.array([max(0.0, ap_transmit_power(dv.f, q) - config.p_ap_max[q])
                   for q in range(q_count)])
    if check_ris_power:
        ris = np.array([max(0.0, power_ris(channels, dv.f, dv.phi, dac, noise, l,
                                           config.eta_ris) - config.p_ris_max[l])
                        for l in range(l_count)])
    else:
        ris = np.zeros(l_count)
    modulus = np.maximum(np.abs(dv.phi) - config.beta_max, 0.0)
    if enforce_min_rate and config.min_rate > 0:
        rates = np.log2(1.0 + all_sinr(channels, dv, noise, dac))
        rate = np.maximum(config.min_rate - rates, 0.0)
    else:
        rate = np.zeros((config.n_users, config.n_subcarriers))

    scale = lambda arr: np.where(np.asarray(arr) > 0, arr, 1.0)
    return Residuals(
        ap_power=ap, ris_power=ris, modulus=modulus, rate=rate,
        ap_scale=scale(config.p_ap_max), ris_scale=scale(config.p_ris_max),
        modulus_scale=config.beta_max,
        rate_scale=config.min_rate if config.min_rate > 0 else 1.0)
