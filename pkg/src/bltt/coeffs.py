"""
Scalar coefficient sequences for the space and time discretizations.

Two families live here:

* the weighted and shifted Grunwald (WSGD) weights ``omega_k`` used for both
  Riemann-Liouville space derivatives, with shift pair (p, q) = (1, 0);
* the L2-1sigma weights for the Caputo time derivative evaluated at the
  off-grid point ``t_{j+sigma}``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

__all__ = [
    "WsgdWeights",
    "L21SigmaWeights",
    "wsgd_weights",
    "l21_sigma_weights",
    "level_coefficients",
]


@dataclass(frozen=True)
class WsgdWeights:
    """Fractional-difference weights ``omega`` and their generators ``g``."""

    beta: float
    omega: np.ndarray
    g: np.ndarray

    def __len__(self):
        return len(self.omega)


@dataclass(frozen=True)
class L21SigmaWeights:
    """
    Coefficients of the L2-1sigma formula for a fixed ``alpha`` and ``tau``.

    ``c`` follows the ``j >= 1`` convention, ``c[0] = kappa (a_0 + b_1)``; the
    first time level uses ``c0_first_step = kappa a_0`` instead. ``b[0]`` is
    stored as 0 (it is never defined by the formula), which makes
    ``v[0] == c0_first_step`` and lets every level share one rule, see
    :func:`level_coefficients`.
    """

    alpha: float
    tau: float
    sigma: float
    kappa: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    c0_first_step: float
    v: np.ndarray

    @property
    def count(self):
        return len(self.c)


def wsgd_weights(beta, count, *, test_mode=False):
    """
    WSGD weights for ``1 < beta < 2``.

    Parameters
    ----------
    beta : float
        Order of the space derivative.
    count : int
        Number of weights to produce (indices ``0 .. count-1``); at least 3.
    test_mode : bool, optional
        Admit the limiting value ``beta = 2`` (second-difference stencil).

    Returns
    -------
    WsgdWeights
    """
    beta = float(beta)
    if not (1.0 < beta < 2.0 or (test_mode and beta == 2.0)):
        raise DomainError(f"beta must lie in (1, 2), got {beta}")
    count = int(count)
    if count < 3:
        raise DomainError(f"count must be >= 3, got {count}")

    k = np.arange(1, count, dtype=float)
    g = np.empty(count)
    g[0] = 1.0
    g[1:] = np.cumprod(1.0 - (beta + 1.0) / k)

    omega = np.empty(count)
    omega[0] = 0.5 * beta * g[0]
    omega[1:] = 0.5 * beta * g[1:] + 0.5 * (2.0 - beta) * g[:-1]
    return WsgdWeights(beta, omega, g)


def _pow_diff(x, y, p):
    # x**p - y**p without cancellation when x - y << y
    return y**p * np.expm1(p * np.log1p((x - y) / y))


def _trapezoid_defect(x, p, terms=40):
    """
    ``int_{x-1/2}^{x+1/2} s**p ds - (f(x+1/2) + f(x-1/2)) / 2`` for ``x >= 1``.

    Summed from the Taylor series about the midpoint, which avoids the
    ``O(x**2)`` cancellation of the closed form. Terms shrink like ``(2x)**-2k``.
    """
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    coef = 1.0
    for m in range(1, 2 * terms + 1):
        coef *= p - m + 1
        if m % 2 == 0:
            weight = 0.5**m * (1.0 / math.factorial(m + 1) - 1.0 / math.factorial(m))
            total += coef * weight * x ** (p - m)
    return total


def l21_sigma_weights(alpha, tau, count):
    """
    L2-1sigma coefficients for ``0 < alpha < 1`` and step ``tau``.

    Fills ``a[0..count]``, ``b[0..count]`` (``b[0] = 0``), ``c[0..count-1]``
    and ``v[0..count]``.
    """
    alpha = float(alpha)
    tau = float(tau)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not tau > 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    count = int(count)
    if count < 2:
        raise DomainError(f"count must be >= 2, got {count}")

    sigma = 1.0 - 0.5 * alpha
    kappa = tau ** (-alpha) / math.gamma(2.0 - alpha)
    if not math.isfinite(kappa):
        raise OverflowError(f"tau**(-alpha) overflows for tau={tau}, alpha={alpha}")

    l = np.arange(1, count + 1, dtype=float)
    hi, lo = l + sigma, l - 1.0 + sigma
    a = np.empty(count + 1)
    a[0] = sigma ** (1.0 - alpha)
    a[1:] = _pow_diff(hi, lo, 1.0 - alpha)
    # b_l = [(l+s)^(2-a) - (l-1+s)^(2-a)]/(2-a) - [(l+s)^(1-a) + (l-1+s)^(1-a)]/2,
    # the trapezoid defect of s^(1-a) on [l-1+s, l+s]
    b = np.zeros(count + 1)
    b[1:] = _trapezoid_defect(l - 0.5 + sigma, 1.0 - alpha)

    c = kappa * (a[:count] + b[1:] - b[:count])
    v = kappa * (a - b)
    return L21SigmaWeights(
        alpha=alpha,
        tau=tau,
        sigma=sigma,
        kappa=kappa,
        a=a,
        b=b,
        c=c,
        c0_first_step=kappa * a[0],
        v=v,
    )


def level_coefficients(w, j):
    """
    Coefficients of the time-fractional sum at level ``j``.

    Entry ``i`` is the level-``j`` value of ``c_i``, which multiplies
    ``u^{j-i+1} - u^{j-i}``. For ``j = 0`` this is ``(kappa a_0,)``; for
    ``j >= 1`` it is ``(c[0], ..., c[j-1], v[j])``.
    """
    j = int(j)
    if j < 0 or j >= w.count:
        raise IndexError(f"level {j} outside 0..{w.count - 1}")
    if j == 0:
        return np.array([w.c0_first_step])
    return np.append(w.c[:j], w.v[j])
