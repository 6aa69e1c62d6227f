"""THz line-of-sight channel generation.

Produces the seeded random geometry, the per-link angle draws, and the rank-1
per-subcarrier channel matrices between APs and RIS panels (G) and between
RIS panels and users (W). All randomness flows from one 64-bit seed through
named Philox sub-streams, so identical seeds give bitwise-identical outputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

C_LIGHT = 3.0e8  # propagation speed used throughout (m/s)


def seeded_rng(seed: int, stream: str) -> np.random.Generator:
    """Counter-based generator for a named sub-stream of a base seed.

    Philox keyed with SHA-256(seed:stream); distinct streams are independent
    and reproducible across platforms.
    """
    digest = hashlib.sha256(f"{seed}:{stream}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class FrequencyGrid:
    """Subcarrier center frequencies of one OFDM band."""

    fc: float
    bw: float
    n_subcarriers: int
    freqs: np.ndarray  # (B,) Hz
    fs: float  # DAC sampling rate, twice the subcarrier bandwidth


def subcarrier_frequencies(fc: float, bw: float, count: int) -> FrequencyGrid:
    """Center frequencies symmetric around fc with spacing bw/count."""
    if fc <= 0 or bw <= 0:
        raise ValueError("fc and bw must be positive")
    if count < 1:
        raise ValueError("subcarrier count must be >= 1")
    spacing = bw / count
    idx = np.arange(count, dtype=float)
    freqs = fc + spacing * (idx - (count - 1) / 2.0)
    return FrequencyGrid(fc=fc, bw=bw, n_subcarriers=count, freqs=freqs, fs=2.0 * spacing)


def path_loss(freq, dist, absorption):
    """Amplitude gain: free-space spreading times molecular absorption.

    delta = c / (4 pi f d) * exp(-xi d / 2). Strictly decreasing in each
    argument.
    """
    freq = np.asarray(freq, dtype=float)
    if np.any(freq <= 0):
        raise ValueError("frequency must be positive")
    dist = float(dist)
    if dist <= 0:
        raise ValueError("distance must be positive")
    if absorption < 0:
        raise ValueError("absorption must be >= 0")
    out = C_LIGHT / (4.0 * np.pi * freq * dist) * np.exp(-absorption * dist / 2.0)
    return float(out) if out.ndim == 0 else out


def element_spacing(fc: float) -> float:
    """Array element spacing: half the carrier wavelength."""
    if fc <= 0:
        raise ValueError("fc must be positive")
    return C_LIGHT / (2.0 * fc)


def upa_shape(n: int) -> tuple:
    """Nearest-to-square factorization (ny, nz) of n with ny >= nz."""
    if n < 1:
        raise ValueError("element count must be >= 1")
    for d in range(int(np.sqrt(n)), 0, -1):
        if n % d == 0:
            return (n // d, d)
    raise AssertionError("unreachable")


def upa_response(azimuth: float, elevation: float, ny: int, nz: int,
                 spacing: float, freq: float) -> np.ndarray:
    """Planar-array response, unit norm, z-index varying fastest.

    Element (iy, iz) carries phase 2 pi spacing f / c *
    (iy sin(azimuth) sin(elevation) + iz cos(elevation)).
    """
    if ny < 1 or nz < 1:
        raise ValueError("array dimensions must be >= 1")
    iy = np.repeat(np.arange(ny), nz)
    iz = np.tile(np.arange(nz), ny)
    phase = (2.0 * np.pi * spacing * freq / C_LIGHT) * (
        iy * np.sin(azimuth) * np.sin(elevation) + iz * np.cos(elevation)
    )
    return np.exp(1j * phase) / np.sqrt(ny * nz)


def ula_response(angle: float, n: int, spacing: float, freq: float) -> np.ndarray:
    """Linear-array response, unit norm."""
    if n < 1:
        raise ValueError("element count must be >= 1")
    phase = (2.0 * np.pi * spacing * freq / C_LIGHT) * np.arange(n) * np.sin(angle)
    return np.exp(1j * phase) / np.sqrt(n)


def antenna_gain(n: int) -> float:
    """Linear power gain of an n-element front end: (4 + 10 log10 sqrt(n)) dB."""
    if n < 1:
        raise ValueError("element count must be >= 1")
    gain_db = 4.0 + 10.0 * np.log10(np.sqrt(n))
    return float(10.0 ** (gain_db / 10.0))


@dataclass(frozen=True)
class Geometry:
    """Node coordinates in meters."""

    ap_pos: np.ndarray  # (Q, 3)
    ris_pos: np.ndarray  # (L, 3)
    user_pos: np.ndarray  # (K, 3)


def place_nodes(config: SystemConfig, seed: int) -> Geometry:
    """APs on a line at x = 0..12, RIS panels from config, users in a 3x3 m box.

    User offsets are drawn from the 'users' sub-stream of the seed. A single
    AP is rejected: the AP spacing formula divides by (Q - 1).
    """
    q_count = config.n_aps
    if q_count < 2:
        raise ValueError("node placement requires at least 2 APs")
    ap = np.zeros((q_count, 3))
    ap[:, 0] = 12.0 * np.arange(q_count) / (q_count - 1)
    ap[:, 1] = -4.0
    ap[:, 2] = 6.0
    ris = np.array(config.ris_pos, dtype=float).reshape(config.n_ris, 3)
    rng = seeded_rng(seed, "users")
    offsets = rng.uniform(0.0, 3.0, size=(config.n_users, 2))
    users = np.zeros((config.n_users, 3))
    users[:, 0] = config.user_distance + offsets[:, 0]
    users[:, 1] = offsets[:, 1]
    users[:, 2] = 1.65
    return Geometry(ap_pos=ap, ris_pos=ris, user_pos=users)


@dataclass(frozen=True)
class LinkAngles:
    """Azimuth/elevation draws, one record per physical link.

    ap_ris[q, l] = (departure azimuth, departure elevation, arrival azimuth,
    arrival elevation); ris_user[l, k] = (departure azimuth, departure
    elevation, user arrival angle). Reused across all subcarriers of a link.
    """

    ap_ris: np.ndarray  # (Q, L, 4)
    ris_user: np.ndarray  # (L, K, 3)


def draw_link_angles(config: SystemConfig, seed: int) -> LinkAngles:
    """All path angles i.i.d. uniform on [-pi/2, pi/2] from the 'angles' stream."""
    rng = seeded_rng(seed, "angles")
    ap_ris = rng.uniform(-np.pi / 2, np.pi / 2, size=(config.n_aps, config.n_ris, 4))
    ris_user = rng.uniform(-np.pi / 2, np.pi / 2, size=(config.n_ris, config.n_users, 3))
    return LinkAngles(ap_ris=ap_ris, ris_user=ris_user)


@dataclass(frozen=True)
class ChannelSet:
    """Rank-1 LoS channels for every link and subcarrier.

    g[q, l, b] is the M x Nt AP-to-RIS matrix, w[l, k, b] the M x Nu
    RIS-to-user matrix. Distances are kept for auditing the norm identity
    ||g|| = sqrt(Gt Nt M) * pathloss.
    """

    g: np.ndarray  # (Q, L, B, M, Nt) complex
    w: np.ndarray  # (L, K, B, M, Nu) complex
    d_ap_ris: np.ndarray  # (Q, L)
    d_ris_user: np.ndarray  # (L, K)
    grid: FrequencyGrid
    angles: LinkAngles


def generate_channels(config: SystemConfig, geometry: Geometry, seed: int) -> ChannelSet:
    """Build the full channel set for one scenario realization."""
    grid = subcarrier_frequencies(config.fc, config.bw, config.n_subcarriers)
    angles = draw_link_angles(config, seed)
    spacing = element_spacing(config.fc)

    q_count, l_count, k_count = config.n_aps, config.n_ris, config.n_users
    b_count = config.n_subcarriers
    nt, nu, m = config.n_ap_antennas, config.n_user_antennas, config.n_ris_elements
    nt_y, nt_z = upa_shape(nt)
    m_y, m_z = upa_shape(m) if m > 0 else (0, 0)

    gain_tx = antenna_gain(nt)
    gain_rx = antenna_gain(nu)

    d_ap_ris = np.linalg.norm(
        geometry.ap_pos[:, None, :] - geometry.ris_pos[None, :, :], axis=2
    )
    d_ris_user = np.linalg.norm(
        geometry.ris_pos[:, None, :] - geometry.user_pos[None, :, :], axis=2
    )

    g = np.zeros((q_count, l_count, b_count, m, nt), dtype=complex)
    w = np.zeros((l_count, k_count, b_count, m, nu), dtype=complex)

    for q in range(q_count):
        for l in range(l_count):
            dep_az, dep_el, arr_az, arr_el = angles.ap_ris[q, l]
            for b in range(b_count):
                f_b = grid.freqs[b]
                amp = np.sqrt(gain_tx * nt * m) * path_loss(f_b, d_ap_ris[q, l], config.absorption)
                a_ris = upa_response(arr_az, arr_el, m_y, m_z, spacing, f_b)
                a_ap = upa_response(dep_az, dep_el, nt_y, nt_z, spacing, f_b)
                g[q, l, b] = amp * np.outer(a_ris, a_ap.conj())

    for l in range(l_count):
        for k in range(k_count):
            dep_az, dep_el, arr = angles.ris_user[l, k]
            for b in range(b_count):
                f_b = grid.freqs[b]
                amp = np.sqrt(gain_rx * m * nu) * path_loss(f_b, d_ris_user[l, k], config.absorption)
                a_ris = upa_response(dep_az, dep_el, m_y, m_z, spacing, f_b)
                a_user = ula_response(arr, nu, spacing, f_b)
                w[l, k, b] = amp * np.outer(a_ris, a_user.conj())

    return ChannelSet(g=g, w=w, d_ap_ris=d_ap_ris, d_ris_user=d_ris_user,
                      grid=grid, angles=angles)
