import math

import numpy as np
import pytest

from cfris.quantization import DacModel, distortion_factor, quantization_noise_cov


def test_distortion_table_exact():
    assert distortion_factor(1) == 0.3634
    assert distortion_factor(2) == 0.1175
    assert distortion_factor(3) == 0.03454
    assert distortion_factor(4) == 0.009497
    assert distortion_factor(5) == 0.002499


def test_distortion_asymptote():
    for b in (6, 8, 12):
        expected = (math.pi * math.sqrt(3.0) / 2.0) * 4.0 ** (-b)
        assert distortion_factor(b) == pytest.approx(expected, rel=1e-12)
    assert distortion_factor(6) == pytest.approx(6.6423e-4, rel=1e-3)
    assert distortion_factor(8) == pytest.approx(4.151e-5, rel=1e-3)


def test_distortion_monotone_decreasing():
    vals = [distortion_factor(b) for b in range(1, 13)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_distortion_rejects_nonpositive_bits():
    with pytest.raises(ValueError):
        distortion_factor(0)


def test_dac_model_gain_identity():
    dac = DacModel.from_bits([1, 3, 8])
    assert np.allclose(dac.lam ** 2 + dac.alpha, 1.0, atol=1e-15)
    assert dac.bits == (1, 3, 8)


def test_dac_model_ideal():
    dac = DacModel.ideal(4)
    assert np.all(dac.alpha == 0.0)
    assert np.all(dac.lam == 1.0)


def test_quantization_noise_cov_hand_case():
    f1 = np.array([1.0 + 0j, 2.0j])
    f2 = np.array([0.0, 1.0 - 1.0j])
    cov = quantization_noise_cov([f1, f2], 0.1)
    # per-antenna summed power: |1|^2 = 1 and |2j|^2 + |1-j|^2 = 6
    assert np.allclose(cov, 0.1 * np.diag([1.0, 6.0]))
    assert np.allclose(cov, cov.conj().T)


def test_quantization_noise_cov_rejects_bad_alpha():
    with pytest.raises(ValueError):
        quantization_noise_cov(np.ones((2, 2)), 1.0)
    with pytest.raises(ValueError):
        quantization_noise_cov(np.ones((2, 2)), -0.01)
