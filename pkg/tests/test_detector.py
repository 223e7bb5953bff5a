import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_edges.analysis import beta_policy, plateau_mask
from spectral_edges.concentration import (classical_factor, noise_adapted_factor,
                                          truncated_factor)
from spectral_edges.config import CATALOG, parse_jumps, parse_smooth
from spectral_edges.detector import (ThresholdPolicy, conjugate_sum, default_grid, detect,
                                     detect_edges, predicted_scale)
from spectral_edges.spectral_core import (ConjugateSymmetryError, SignalSpec, SpectralData,
                                          add_white_noise, analytic_coefficients)

SAW = SignalSpec.sawtooth()
TWO_JUMPS = SignalSpec(((-math.pi / 2, 1.0), (math.pi / 2, -0.5)))


def naive_conjugate_sum(data, factor, x):
    total = 0j
    for k in range(1, data.N + 1):
        s = factor.values[k - 1]
        total += math.pi * 1j * s * (data[k] * np.exp(1j * k * x) - data[-k] * np.exp(-1j * k * x))
    return total.real


def test_sawtooth_classical_is_one_at_jump():
    for N in (1, 7, 128, 1000):
        d = analytic_coefficients(SAW, N)
        assert conjugate_sum(d, classical_factor(N), [0.0])[0] == pytest.approx(1.0, abs=1e-12)


def test_zero_data():
    d = SpectralData(16, np.zeros(33, complex))
    np.testing.assert_array_equal(conjugate_sum(d, classical_factor(16), default_grid(16)), 0)


def test_noise_adapted_amplitude_within_scale():
    eta, N = 1e-6, 128
    beta = beta_policy(eta)
    f = noise_adapted_factor(eta, beta, N)
    eps = predicted_scale(eta, beta, N)
    clean = analytic_coefficients(SAW, N)
    assert abs(conjugate_sum(clean, f, [0.0])[0] - 1) <= eps
    noisy = add_white_noise(clean, eta, seed=3)
    assert abs(conjugate_sum(noisy, f, [0.0])[0] - 1) <= eps


def test_complex_and_real_forms_agree():
    d = add_white_noise(analytic_coefficients(TWO_JUMPS, 200), 1e-4, 9)
    f = noise_adapted_factor(1e-4, 10.0, 200)
    x = np.linspace(-3, 3, 777)
    a = conjugate_sum(d, f, x, form="complex")
    b = conjugate_sum(d, f, x, form="real")
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))
    assert a[100] == pytest.approx(naive_conjugate_sum(d, f, x[100]), abs=1e-12)


def test_fft_and_direct_agree():
    d = analytic_coefficients(TWO_JUMPS, 100)
    f = classical_factor(100)
    x = default_grid(100)
    a = conjugate_sum(d, f, x, method="fft")
    b = conjugate_sum(d, f, x, method="direct")
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_fft_requires_full_period():
    d = analytic_coefficients(SAW, 10)
    with pytest.raises(ValueError):
        conjugate_sum(d, classical_factor(10), np.linspace(-1, 1, 50), method="fft")


def test_conjugate_sum_rejects():
    d = analytic_coefficients(SAW, 10)
    with pytest.raises(ValueError, match="N"):
        conjugate_sum(d, classical_factor(11), [0.0])
    c = d.coeffs.copy()
    c[12] += 0.1j
    with pytest.raises(ConjugateSymmetryError):
        conjugate_sum(SpectralData(10, c), classical_factor(10), [0.0])
    with pytest.raises(ValueError):
        conjugate_sum(d, classical_factor(10), [0.0], form="polar")


def test_predicted_scale_values():
    assert predicted_scale(0.0, None, 100) == pytest.approx(0.04605, abs=1e-5)
    assert predicted_scale(0.0, 3.0, 1000) == pytest.approx(math.log(1000) / 1000)
    assert predicted_scale(1e-4, 10.0, 1000) == pytest.approx(0.2303, abs=1e-4)
    # below the crossover the noiseless scale applies
    assert predicted_scale(1e-12, 1.0, 1000) == pytest.approx(math.log(1000) / 1000)
    with pytest.raises(ValueError):
        predicted_scale(0.0, None, 1)
    with pytest.raises(ValueError):
        predicted_scale(1e-2, 20.0, 1000)


def test_detect_zero_samples():
    x = default_grid(32)
    r = detect_edges(x, np.zeros_like(x), 0.1, N=32)
    assert r.edges == []


def test_detect_sawtooth_classical():
    N = 128
    r = detect(analytic_coefficients(SAW, N), classical_factor(N), default_grid(N, 1024),
               ThresholdPolicy(c_abs=5, c_rel=0.3))
    h = 2 * math.pi / 1024
    assert len(r.edges) == 1
    loc, amp = r.edges[0]
    assert abs(loc) <= h
    assert abs(amp - 1) <= 5 * math.log(N) / N
    assert r.epsilon_predicted == pytest.approx(math.log(N) / N)


def test_detect_two_jumps():
    N = 256
    r = detect(analytic_coefficients(TWO_JUMPS, N), classical_factor(N))
    eps = r.epsilon_predicted
    assert len(r.edges) == 2
    (z1, a1), (z2, a2) = r.edges
    assert z1 == pytest.approx(-math.pi / 2, abs=eps) and a1 > 0
    assert z2 == pytest.approx(math.pi / 2, abs=eps) and a2 < 0
    assert abs(a1 - 1) <= 5 * eps and abs(a2 + 0.5) <= 5 * eps
    assert all(abs(a) > r.threshold_used for _, a in r.edges)


def test_detect_refine_stays_close():
    N = 128
    policy = ThresholdPolicy(refine=True)
    r = detect(analytic_coefficients(SAW.shifted(0.3), N), classical_factor(N), policy=policy)
    h = 2 * math.pi / (8 * N)
    assert len(r.edges) == 1 and abs(r.edges[0][0] - 0.3) <= h


def test_detect_rejects_bad_grids():
    with pytest.raises(ValueError, match="empty"):
        detect_edges([], [], 0.1)
    x = np.array([0.0, 0.1, 0.3, 0.4])
    with pytest.raises(ValueError, match="uniform"):
        detect_edges(x, np.ones(4), 0.1)
    with pytest.raises(ValueError):
        detect_edges([0.0, 0.1], [0.0, np.nan], 0.1)


def test_threshold_policy():
    p = ThresholdPolicy()
    assert p.threshold(1.0, 0.01) == pytest.approx(0.3)
    assert p.threshold(1.0, 0.08) == pytest.approx(0.4)
    # floor is capped at half the peak
    assert p.threshold(1.0, 0.3) == pytest.approx(0.5)


def test_window_merges_broad_peak():
    x = default_grid(100)
    samples = np.exp(-(x / 0.2) ** 2) * (1 + 0.05 * np.cos(200 * x))
    narrow = detect_edges(x, samples, 0.2, N=100)
    wide = detect_edges(x, samples, 0.2, ThresholdPolicy(window_eps=1.0), N=100)
    assert len(narrow.edges) > 1
    assert len(wide.edges) == 1


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 2**20))
def test_linearity(a, seed):
    N = 64
    f = noise_adapted_factor(1e-4, 5.0, N)
    d1 = add_white_noise(analytic_coefficients(SAW, N), 1e-3, seed)
    d2 = analytic_coefficients(TWO_JUMPS, N)
    x = default_grid(N)
    lhs = conjugate_sum(d1.scaled(a) + d2, f, x)
    rhs = a * conjugate_sum(d1, f, x) + conjugate_sum(d2, f, x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(-500, 500))
def test_translation_equivariance(cells):
    N = 64
    x = default_grid(N)
    h = x[1] - x[0]
    f = classical_factor(N)
    base = conjugate_sum(analytic_coefficients(SAW, N), f, x)
    moved = conjugate_sum(analytic_coefficients(SAW.shifted(cells * h), N), f, x)
    np.testing.assert_allclose(moved, np.roll(base, cells), atol=1e-12)


def test_even_about_jump():
    N = 200
    for f in (classical_factor(N), noise_adapted_factor(1e-4, 10.0, N)):
        y = np.linspace(0, 3, 301)
        d = analytic_coefficients(SAW.shifted(0.7), N)
        np.testing.assert_allclose(conjugate_sum(d, f, 0.7 + y), conjugate_sum(d, f, 0.7 - y),
                                   atol=1e-12)


@pytest.mark.parametrize("name", ["sawtooth", "two_jumps", "smooth_sawtooth"])
@pytest.mark.parametrize("N", [128, 512])
def test_plateau_and_concentration_constants(name, N):
    jumps, smooth = CATALOG[name]
    signal = SignalSpec(tuple(parse_jumps(jumps)), parse_smooth(smooth))
    x = default_grid(N)
    K = conjugate_sum(analytic_coefficients(signal, N), classical_factor(N), x)
    eps = math.log(N) / N
    far = plateau_mask(x, signal.locations, 10 * eps)
    C_plateau = np.max(np.abs(K[far])) / eps
    C_jump = max(abs(K[np.argmin(np.abs(x - z))] - a) for z, a in signal.jumps) / eps
    print(f"{name} N={N}: plateau C={C_plateau:.3f}, jump C={C_jump:.3f}")
    assert C_plateau <= 10 and C_jump <= 10


def test_truncated_factor_detects_smooth_sawtooth():
    eta = 2e-5
    beta = beta_policy(eta)
    f = truncated_factor(eta, beta, 8 * math.pi, 1000, 2000)
    jumps, smooth = CATALOG["smooth_sawtooth"]
    signal = SignalSpec(tuple(parse_jumps(jumps)), parse_smooth(smooth))
    data = add_white_noise(analytic_coefficients(signal, 2000), eta, 1)
    r = detect(data, f, policy=ThresholdPolicy(window_eps=1.0))
    assert len(r.edges) == 1
    assert abs(r.edges[0][0]) <= r.epsilon_predicted
