import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_edges.spectral_core import (ConjugateSymmetryError, SignalSpec, SpectralData,
                                          add_white_noise, analytic_coefficients, cos_term,
                                          merge_coefficients, noise_coefficients,
                                          partial_sum_eval, quadrature_coefficients, sin_term,
                                          wrap_angle)

SAW = SignalSpec.sawtooth()


def naive_partial_sum(data, x):
    total = 0j
    for k in range(-data.N, data.N + 1):
        total += data[k] * complex(math.cos(k * x), math.sin(k * x))
    return total.real


def test_sawtooth_coefficients():
    d = analytic_coefficients(SAW, 4)
    assert d[0] == 0
    for k in (-4, -3, -2, -1, 1, 2, 3, 4):
        assert d[k] == pytest.approx(1 / (2j * math.pi * k), abs=1e-15)
    assert d.noise_variance is None and d.seed is None


def test_cosine_coefficients():
    d = analytic_coefficients(SignalSpec(smooth=cos_term(1)), 5)
    expected = np.zeros(11, complex)
    expected[5 - 1] = expected[5 + 1] = 0.5
    np.testing.assert_array_equal(d.coeffs, expected)


def test_jump_at_half_pi():
    s = SignalSpec(((math.pi / 2, 1.0),))
    d = analytic_coefficients(s, 2)
    assert d[1] == pytest.approx(-1 / (2 * math.pi), abs=1e-15)
    # midpoint aliasing error falls like 1/M^2 when the jump sits on a cell edge
    q = quadrature_coefficients(s, 2, 2**17)
    assert abs(q[1] - (-1 / (2 * math.pi))) <= 1e-10


def test_quadrature_zero_signal():
    q = quadrature_coefficients(SignalSpec(), 7)
    assert np.all(q.coeffs == 0)


def test_quadrature_sawtooth_sanity():
    q = quadrature_coefficients(SAW, 16, 1024)
    a = analytic_coefficients(SAW, 16)
    err = np.max(np.abs(q.coeffs - a.coeffs))
    assert err <= 1e-3
    # achieved error when frozen: about 4.0e-6
    assert err < 1e-5


def test_quadrature_band_limited_exact():
    q = quadrature_coefficients(SignalSpec(smooth=cos_term(3)), 8, 256)
    assert abs(q[3] - 0.5) <= 1e-12 and abs(q[-3] - 0.5) <= 1e-12
    others = np.delete(q.coeffs, [8 - 3, 8 + 3])
    assert np.max(np.abs(others)) <= 1e-12


def test_quadrature_rejects_aliasing():
    with pytest.raises(ValueError):
        quadrature_coefficients(SAW, 16, 32)


def test_quadrature_default_size_is_large_enough():
    q = quadrature_coefficients(SignalSpec(smooth=sin_term(5, 2.0)), 6)
    assert q[5] == pytest.approx(-1j, abs=1e-12)


def test_noise_zero_variance_is_identity():
    d = analytic_coefficients(SAW, 32)
    out = add_white_noise(d, 0.0, 5)
    np.testing.assert_array_equal(out.coeffs, d.coeffs)


def test_noise_power_law_of_large_numbers():
    n = noise_coefficients(1000, 1e-4, seed=11)
    power = np.mean(np.abs(n[1001:]) ** 2)
    assert abs(power / 1e-4 - 1) < 0.10


def test_noise_power_many_modes():
    n = noise_coefficients(20000, 3e-3, seed=2)
    pos = n[20001:]
    assert abs(np.mean(np.abs(pos) ** 2) / 3e-3 - 1) < 0.05
    # Rayleigh mean modulus sqrt(pi eta) / 2
    assert np.mean(np.abs(pos)) == pytest.approx(math.sqrt(math.pi * 3e-3) / 2, rel=0.02)
    assert np.var(pos.real) == pytest.approx(np.var(pos.imag), rel=0.05)


def test_noise_is_deterministic_and_symmetric():
    d = analytic_coefficients(SAW, 64)
    a = add_white_noise(d, 1e-3, 42)
    b = add_white_noise(d, 1e-3, 42)
    c = add_white_noise(d, 1e-3, 43)
    assert a.coeffs.tobytes() == b.coeffs.tobytes()
    assert not np.array_equal(a.coeffs, c.coeffs)
    assert a.is_conjugate_symmetric() and a.symmetry_defect() == 0
    assert a.noise_variance == 1e-3 and a.seed == 42
    assert a[0].imag == 0


def test_noise_rejects_negative_variance():
    with pytest.raises(ValueError):
        add_white_noise(analytic_coefficients(SAW, 4), -1e-3, 0)


def test_partial_sum_constant():
    c = np.zeros(9, complex)
    c[4] = 1
    np.testing.assert_allclose(partial_sum_eval(SpectralData(4, c), [-3.0, 0.0, 1.0, 3.1]), 1.0)


def test_partial_sum_cosine():
    d = analytic_coefficients(SignalSpec(smooth=cos_term(1)), 3)
    assert partial_sum_eval(d, [0.0])[0] == pytest.approx(1.0, abs=1e-15)


def test_partial_sum_matches_naive():
    d = analytic_coefficients(SAW, 64)
    got = partial_sum_eval(d, [math.pi / 2])[0]
    assert abs(got - naive_partial_sum(d, math.pi / 2)) <= 1e-12
    # close to the ramp value 1/4 at a smooth point
    assert got == pytest.approx(0.25, abs=1e-2)


def test_partial_sum_rejects_asymmetric():
    c = np.zeros(5, complex)
    c[3] = 1.0
    with pytest.raises(ConjugateSymmetryError):
        partial_sum_eval(SpectralData(2, c), [0.0])


def test_partial_sum_rejects_nonfinite_grid():
    with pytest.raises(ValueError):
        partial_sum_eval(analytic_coefficients(SAW, 4), [0.0, float("nan")])


def test_signal_values():
    assert SAW(0.0) == 0.0
    assert SAW(1e-9) == pytest.approx(0.5, abs=1e-9)
    assert SAW(-1e-9) == pytest.approx(-0.5, abs=1e-9)
    assert SAW(math.pi) == pytest.approx(0.0, abs=1e-15)


def test_signal_validation():
    with pytest.raises(ValueError):
        SignalSpec(((0.0, 1.0), (0.0, 2.0)))
    with pytest.raises(ValueError):
        SignalSpec(((0.5, 0.0),))
    with pytest.raises(ValueError):
        SignalSpec(smooth={1: 1.0})
    with pytest.raises(ValueError):
        SignalSpec(smooth={0: 1j})


def test_spectral_data_validation():
    with pytest.raises(ValueError):
        SpectralData(3, np.zeros(5, complex))
    with pytest.raises(ValueError):
        SpectralData(1, np.array([0, np.inf, 0], complex))


def test_wrap_angle():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_merge_drops_cancelled_terms():
    assert merge_coefficients(cos_term(2), cos_term(2, -1.0)) == {}


jump_lists = st.lists(
    st.tuples(st.floats(-3.1, 3.1), st.floats(0.1, 3.0) | st.floats(-3.0, -0.1)),
    min_size=0, max_size=3, unique_by=lambda t: round(t[0], 3))
smooth_parts = st.dictionaries(st.integers(1, 6), st.floats(-2, 2), max_size=3).map(
    lambda d: merge_coefficients(*(cos_term(k, a) for k, a in d.items())))


@settings(max_examples=40, deadline=None)
@given(jump_lists, smooth_parts, jump_lists, smooth_parts)
def test_linearity(j1, s1, j2, s2):
    locs2 = {round(z, 3) for z, _ in j1}
    j2 = [t for t in j2 if round(t[0], 3) not in locs2]
    a, b = SignalSpec(tuple(j1), s1), SignalSpec(tuple(j2), s2)
    ca, cb = analytic_coefficients(a, 20), analytic_coefficients(b, 20)
    cab = analytic_coefficients(a + b, 20)
    np.testing.assert_allclose(cab.coeffs, ca.coeffs + cb.coeffs, atol=1e-14)
    assert cab.is_conjugate_symmetric()


@settings(max_examples=40, deadline=None)
@given(jump_lists, st.floats(-2.0, 2.0))
def test_translation_covariance(jumps, delta):
    s = SignalSpec(tuple(jumps))
    base = analytic_coefficients(s, 24)
    moved = analytic_coefficients(s.shifted(delta), 24)
    k = base.modes
    np.testing.assert_allclose(moved.coeffs, base.coeffs * np.exp(-1j * k * delta), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 200), st.floats(0, 1.0), st.integers(0, 2**31))
def test_noise_preserves_symmetry(N, eta, seed):
    d = add_white_noise(analytic_coefficients(SAW, N), eta, seed)
    assert d.symmetry_defect() == 0
    assert np.all(np.isfinite(d.coeffs))
