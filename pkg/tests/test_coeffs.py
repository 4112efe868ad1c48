import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bltt.coeffs import l21_sigma_weights, level_coefficients, wsgd_weights
from bltt.errors import DomainError

BETAS = (1.1, 1.4, 1.7, 1.9)


def test_wsgd_leading_values():
    w = wsgd_weights(1.5, 10)
    assert w.omega[0] == pytest.approx(0.75, rel=1e-15)
    assert w.omega[1] == pytest.approx(-0.875, rel=1e-15)


def test_wsgd_second_difference_limit():
    w = wsgd_weights(2.0, 6, test_mode=True)
    np.testing.assert_allclose(w.omega[:4], [1.0, -2.0, 1.0, 0.0], atol=1e-15)
    with pytest.raises(DomainError):
        wsgd_weights(2.0, 6)


@pytest.mark.parametrize("beta", [1.0, 2.0, 0.5, -1.0, float("nan")])
def test_wsgd_domain(beta):
    with pytest.raises(DomainError):
        wsgd_weights(beta, 10)


def test_wsgd_recurrence_matches_gamma_ratio():
    # g_k = Gamma(k - beta) / (Gamma(-beta) Gamma(k + 1)), evaluated independently
    beta = 1.3
    w = wsgd_weights(beta, 40)
    with mpmath.workdps(30):
        ref = [float(mpmath.gamma(k - beta) / (mpmath.gamma(-beta) * mpmath.factorial(k))) for k in range(40)]
    np.testing.assert_allclose(w.g, ref, rtol=1e-12)


def test_wsgd_partial_sum_beta_1_1():
    w = wsgd_weights(1.1, 51)
    assert w.omega[:51].sum() < 0


@pytest.mark.parametrize("beta", BETAS)
def test_wsgd_sign_and_monotonicity(beta):
    w = wsgd_weights(beta, 4096)
    om = w.omega
    assert om[0] > 0 and om[1] < 0
    assert om[0] + om[2] > 0
    tail = om[3:]
    assert np.all(tail >= 0)
    assert np.all(np.diff(tail) <= 0)
    partial = np.cumsum(om)[2:]
    assert np.all(partial < 0)
    assert np.all(np.diff(partial[1:]) >= 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.001, 1.999))
def test_wsgd_properties_random_beta(beta):
    om = wsgd_weights(beta, 300).omega
    assert om[0] > 0 > om[1]
    assert om[0] + om[2] > 0
    assert np.all(np.diff(om[3:]) <= 0) and np.all(om[3:] >= 0)
    assert np.all(np.cumsum(om)[2:] < 0)


def _b_oracle(alpha, l):
    s = 1 - mpmath.mpf(alpha) / 2
    al = mpmath.mpf(alpha)
    return ((l + s) ** (2 - al) - (l - 1 + s) ** (2 - al)) / (2 - al) - ((l + s) ** (1 - al) + (l - 1 + s) ** (1 - al)) / 2


def test_l21_basic_values():
    w = l21_sigma_weights(0.5, 0.1, 20)
    assert w.sigma == 0.75
    assert w.a[0] == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert w.a[0] == pytest.approx(0.866025, abs=1e-6)
    with mpmath.workdps(40):
        assert w.b[1] == pytest.approx(float(_b_oracle(0.5, 1)), rel=1e-13)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
def test_l21_kappa_unit_step(alpha):
    w = l21_sigma_weights(alpha, 1.0, 5)
    assert w.kappa == pytest.approx(1.0 / math.gamma(2 - alpha), rel=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.7])
def test_l21_against_mpmath(alpha):
    w = l21_sigma_weights(alpha, 0.01, 200)
    with mpmath.workdps(40):
        s = 1 - mpmath.mpf(alpha) / 2
        a_ref = [s ** (1 - alpha)] + [(l + s) ** (1 - alpha) - (l - 1 + s) ** (1 - alpha) for l in range(1, 201)]
        b_ref = [0] + [_b_oracle(alpha, l) for l in range(1, 201)]
        a_ref = np.array([float(x) for x in a_ref])
        b_ref = np.array([float(x) for x in b_ref])
    np.testing.assert_allclose(w.a, a_ref, rtol=1e-13)
    np.testing.assert_allclose(w.b[1:], b_ref[1:], rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(1e-4, 1.0))
def test_l21_a_positive_decreasing(alpha, tau):
    w = l21_sigma_weights(alpha, tau, 500)
    assert np.all(w.a > 0)
    assert np.all(np.diff(w.a) < 0)


def test_l21_domain():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            l21_sigma_weights(bad, 0.1, 5)
    with pytest.raises(DomainError):
        l21_sigma_weights(0.5, 0.0, 5)


def test_level_coefficients_branches():
    w = l21_sigma_weights(0.4, 0.05, 10)
    np.testing.assert_allclose(level_coefficients(w, 0), [w.kappa * w.a[0]])
    np.testing.assert_allclose(
        level_coefficients(w, 1),
        [w.kappa * (w.a[0] + w.b[1]), w.kappa * (w.a[1] - w.b[1])],
        rtol=1e-15,
    )


def test_level_coefficients_piecewise_j3():
    alpha, tau, j = 0.7, 0.1, 3
    w = l21_sigma_weights(alpha, tau, 10)
    with mpmath.workdps(40):
        s = 1 - mpmath.mpf(alpha) / 2
        kap = mpmath.mpf(tau) ** (-alpha) / mpmath.gamma(2 - alpha)

        def a(l):
            return s ** (1 - alpha) if l == 0 else (l + s) ** (1 - alpha) - (l - 1 + s) ** (1 - alpha)

        ref = []
        for i in range(j + 1):
            if i == 0:
                ref.append(kap * (a(0) + _b_oracle(alpha, 1)))
            elif i == j:
                ref.append(kap * (a(j) - _b_oracle(alpha, j)))
            else:
                ref.append(kap * (a(i) + _b_oracle(alpha, i + 1) - _b_oracle(alpha, i)))
        ref = [float(x) for x in ref]
    np.testing.assert_allclose(level_coefficients(w, j), ref, rtol=1e-13)


def test_level_coefficients_out_of_range():
    w = l21_sigma_weights(0.4, 0.05, 4)
    with pytest.raises(IndexError):
        level_coefficients(w, 4)
    with pytest.raises(IndexError):
        level_coefficients(w, -1)


def test_l21_scheme_second_order():
    # L2-1sigma applied to u = exp(2t) at t_{j+sigma}, against the Caputo derivative
    from bltt.assembly import mittag_leffler

    alpha = 0.5
    errs = []
    for M in (32, 64, 128):
        tau = 1.0 / M
        w = l21_sigma_weights(alpha, tau, M + 1)
        t = tau * np.arange(M + 1)
        u = np.exp(2 * t)
        j = M - 1
        coef = level_coefficients(w, j)
        du = u[1 : j + 2] - u[: j + 1]
        approx = coef @ du[::-1]
        ts = (j + w.sigma) * tau
        exact = 2 * ts ** (1 - alpha) * mittag_leffler(1.0, 2 - alpha, 2 * ts)
        errs.append(abs(approx - exact))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)
