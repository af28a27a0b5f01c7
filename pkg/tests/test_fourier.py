from math import log, sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhocollide import fourier as fr
from rhocollide.blockwalk import increment_distribution, zs_distribution


def _g_by_series(y, kmax=80):
    k = np.arange(-kmax, kmax + 1)
    return float(np.real(np.sum(fr.geometric_law(k) * np.exp(2j * np.pi * k * y))))


def test_g_special_values():
    assert fr.geometric_g(0) == pytest.approx(1, abs=1e-15)
    assert fr.geometric_g(0.5) == pytest.approx(0.2, abs=1e-12)


@given(st.floats(-3, 3))
def test_g_matches_series_and_symmetries(y):
    g = fr.geometric_g(y)
    assert g == pytest.approx(_g_by_series(y), abs=1e-12)
    assert abs(g - fr.geometric_g(1 - y)) <= 1e-12
    assert abs(g - fr.geometric_g(-y)) <= 1e-12


def test_g_decreasing_with_bounded_slope():
    y = np.linspace(0, 0.5, 10_001)
    g = fr.geometric_g(y)
    slope = np.diff(g) / np.diff(y)
    assert np.all(slope <= 1e-12)
    assert np.all(slope > -5)


def test_geometric_law_normalized():
    k = np.arange(-100, 101)
    assert fr.geometric_law(k).sum() == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("t", fr.SUPPORTED_T)
def test_pi_zero_is_one(t):
    assert fr.pi_j(t, 0) == pytest.approx(1, abs=1e-15)


@pytest.mark.parametrize("t", fr.SUPPORTED_T)
def test_pi1_window_and_symmetry(t):
    pi = fr.pi_vector(t)
    lo, hi = fr.pi1_window(t)
    assert lo - 1e-6 <= pi[1] <= hi + 1e-6
    assert 2.5e-4 < pi[1] < 0.25
    for j in range(1, t):
        assert abs(pi[t - j] - pi[j]) <= 1e-10


def test_pi_rejects_unsupported_t():
    with pytest.raises(fr.NotMersennePrime):
        fr.pi_j(11, 1)
    with pytest.raises(ValueError):
        fr.pi_j(13, 13)


def test_pi_matches_fft_of_exact_block_distribution():
    # independent oracle: nu_13 = law of 2 Z_12 + b built by permutation + FFT convolution
    t = 13
    p = (1 << t) - 1
    mu = increment_distribution(p, p - 1)
    mu_f = np.fft.fft(mu)
    nu = mu.copy()
    idx = 2 * np.arange(p) % p
    for _ in range(t - 1):
        doubled = np.zeros(p)
        doubled[idx] = nu
        nu = np.real(np.fft.ifft(np.fft.fft(doubled) * mu_f))
    pi = fr.pi_vector(t)
    for j in range(t):
        ell = (1 << j) - 1
        coeff = fr.distribution_hat(nu, ell)
        assert abs(coeff.imag) < 1e-9
        assert coeff.real == pytest.approx(pi[j], abs=1e-9)


def test_separation_t13_r1():
    rep = fr.separation_diagnostic(13, 1)
    assert rep.E_Pn_f == pytest.approx(13 * fr.pi_j(13, 1))
    assert abs(rep.E_Pn_f) > 0
    assert rep.n == 13


def test_separation_vanishes_for_large_r():
    rep = fr.separation_diagnostic(13, 200)
    assert abs(rep.E_Pn_f) < 1e-100
    assert not rep.separated
    assert rep.var_Pn_f == pytest.approx(13, rel=1e-9)


def test_separation_moments_match_exact_distribution():
    # E f and E|f|^2 under nu_n computed by direct summation at t = 13, r = 1
    t, r = 13, 1
    p = (1 << t) - 1
    nu = zs_distribution(p, p - 1, r * t)
    k = np.arange(p, dtype=np.int64)
    f = sum(np.exp(2j * np.pi * ((k << j) % p) / p) for j in range(t))
    mean = complex(np.sum(nu * f))
    var = float(np.sum(nu * np.abs(f) ** 2) - abs(mean) ** 2)
    rep = fr.separation_diagnostic(t, r)
    assert mean.real == pytest.approx(rep.E_Pn_f.real, abs=1e-9)
    assert abs(mean.imag) < 1e-9
    assert var == pytest.approx(rep.var_Pn_f, abs=1e-8)


def test_separation_rejects_r0():
    with pytest.raises(ValueError):
        fr.separation_diagnostic(13, 0)


def test_largest_separated_r_near_prediction():
    t = 13
    scan = fr.separation_scan(t, 40)
    separated = [rep.r for rep in scan if rep.separated]
    assert separated, "no r separates at t=13"
    assert abs(max(separated) - fr.predicted_r(t)) <= 3


def test_direct_moments_t13():
    mean, var = fr.direct_f_moments(13)
    assert abs(mean) < 1e-9
    assert var == pytest.approx(13, abs=1e-6)
    assert fr.separating_f(13, 0) == 13
    with pytest.raises(ValueError):
        fr.direct_f_moments(17)


def test_mu_hat_basics():
    mu = increment_distribution(101, 3)
    assert fr.mu_hat(mu, 1, 0, 101) == pytest.approx(1)
    assert all(abs(fr.mu_hat(mu, 4, ell, 101)) <= 1 + 1e-12 for ell in range(101))


def test_mu_hat_convolution_identity():
    N, s = 101, 5
    mu = increment_distribution(N, 3)
    nu = zs_distribution(N, 3, s, mu)
    for ell in range(N):
        prod = np.prod([fr.mu_hat(mu, 2**r, ell, N) for r in range(s)])
        assert abs(fr.distribution_hat(nu, ell) - prod) <= 1e-9


def test_folded_law_transform_is_g():
    N = 8191
    mu = fr.folded_geometric_law(N)
    for ell in (1, 7, 100, 4095):
        assert fr.mu_hat(mu, 1, ell, N).real == pytest.approx(fr.geometric_g(ell / N), abs=1e-12)


def test_predicted_r_formula():
    assert fr.predicted_r(13) == pytest.approx(log(13) / (2 * log(1 / fr.pi_j(13, 1))))
