"""Additive quantization noise model for low-resolution DACs.

A b-bit DAC is linearized as gain sqrt(1 - alpha) on the intended signal plus
uncorrelated noise whose covariance is alpha times the diagonal of the signal
covariance. Distortion factors for 1..5 bits come from the standard table;
higher resolutions use the uniform-quantizer asymptote (pi sqrt(3) / 2) 4^-b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ALPHA_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}


def distortion_factor(bits: int) -> float:
    """Distortion factor alpha for one DAC resolution."""
    bits = int(bits)
    if bits < 1:
        raise ValueError("DAC resolution must be >= 1 bit")
    if bits <= 5:
        return _ALPHA_TABLE[bits]
    return (np.pi * np.sqrt(3.0) / 2.0) * 2.0 ** (-2 * bits)


@dataclass(frozen=True)
class DacModel:
    """Per-AP DAC resolutions with derived gain and distortion factors."""

    bits: tuple  # (Q,)
    alpha: np.ndarray  # (Q,)
    lam: np.ndarray  # (Q,) sqrt(1 - alpha)

    @classmethod
    def from_bits(cls, bits_per_ap) -> "DacModel":
        bits = tuple(int(b) for b in bits_per_ap)
        alpha = np.array([distortion_factor(b) for b in bits])
        return cls(bits=bits, alpha=alpha, lam=np.sqrt(1.0 - alpha))

    @classmethod
    def ideal(cls, q_count: int) -> "DacModel":
        """Distortion-free model (alpha = 0), for oracles and limits."""
        return cls(bits=("inf",) * q_count, alpha=np.zeros(q_count), lam=np.ones(q_count))


def quantization_noise_cov(precoders, alpha: float) -> np.ndarray:
    """Covariance of the quantization noise at one AP and subcarrier.

    `precoders` holds the K per-user precoding vectors (any iterable of
    length-Nt complex vectors, or a K x Nt array). Returns the real diagonal
    matrix alpha * diag(sum_k f_k f_k^H).
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    stack = np.atleast_2d(np.asarray(precoders, dtype=complex))
    diag = alpha * np.sum(np.abs(stack) ** 2, axis=0)
    return np.diag(diag)
