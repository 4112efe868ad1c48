"""
Problem definition and the all-at-once block lower triangular Toeplitz system.

Unknowns of the all-at-once system are ordered time-slowest, space-fastest:
``u = [u^2; u^3; ...; u^M]`` with each block holding the ``N - 1`` interior
nodes. Block row ``j`` (1-based) of ``W`` is

    A_0 u^{j+1} + A_1 u^j + sum_{k=2}^{j-1} A_k u^{j+1-k}

where ``A_0 = s_0 I - sigma K_N``, ``A_1 = s_1 I - (1 - sigma) K_N`` and
``A_k = d_k I`` for ``k >= 2``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional
import math

import numpy as np
import scipy.signal

from .coeffs import L21SigmaWeights, WsgdWeights, l21_sigma_weights, wsgd_weights
from .errors import DenseCapExceeded, DomainError
from .structured import ToeplitzOperator

__all__ = [
    "ProblemSpec",
    "KnOperator",
    "BlttSystem",
    "MittagLefflerParams",
    "mittag_leffler",
    "example1_problem",
    "assemble_system",
    "apply_W",
    "first_step_rhs",
    "all_at_once_rhs",
    "dense_materialize_W",
    "W_DENSE_CAP",
]

W_DENSE_CAP = 4096


@dataclass(frozen=True)
class ProblemSpec:
    """
    Time-space fractional diffusion problem on ``[0, L] x (0, T]``.

    ``u0`` takes an array of nodes, ``source`` and ``exact`` take
    ``(x, t)`` with ``x`` an array and ``t`` a scalar.
    """

    alpha: float
    beta: float
    e1: float
    e2: float
    L: float
    T: float
    N: int
    M: int
    u0: Callable
    source: Callable
    exact: Optional[Callable] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 1.0 < self.beta < 2.0:
            raise DomainError(f"beta must lie in (1, 2), got {self.beta}")
        if not (self.e1 > 0 and self.e2 > 0):
            raise DomainError("diffusion coefficients e1, e2 must be positive")
        if not (self.L > 0 and self.T > 0):
            raise DomainError("L and T must be positive")
        if self.N < 3 or self.M < 3:
            raise DomainError(f"need N >= 3 and M >= 3, got N={self.N}, M={self.M}")

    @property
    def h(self):
        return self.L / self.N

    @property
    def tau(self):
        return self.T / self.M

    @property
    def x(self):
        """Interior nodes ``x_1 .. x_{N-1}``."""
        return self.h * np.arange(1, self.N)

    @property
    def t(self):
        """Time levels ``t_0 .. t_M``."""
        return self.tau * np.arange(self.M + 1)


@dataclass(frozen=True)
class KnOperator:
    """``K_N = e1 G + e2 G^T`` as a single Toeplitz operator."""

    e1: float
    e2: float
    G: ToeplitzOperator
    op: ToeplitzOperator = field(init=False, repr=False)

    def __post_init__(self):
        col = self.e1 * self.G.first_col + self.e2 * self.G.first_row
        row = self.e1 * self.G.first_row + self.e2 * self.G.first_col
        object.__setattr__(self, "op", ToeplitzOperator(col, row))

    @property
    def n(self):
        return self.G.n

    def apply(self, v):
        return self.op.matvec(v)

    def todense(self, cap=1024):
        return self.op.todense(cap)


def g_beta(w: WsgdWeights, n):
    """Toeplitz ``G_beta`` of order ``n`` from WSGD weights (needs ``n + 1`` of them)."""
    if len(w) < n + 1:
        raise ValueError(f"need at least {n + 1} weights, have {len(w)}")
    col = w.omega[1 : n + 1].copy()
    row = np.zeros(n)
    row[0] = w.omega[1]
    if n > 1:
        row[1] = w.omega[0]
    return ToeplitzOperator(col, row)


@dataclass(frozen=True)
class BlttSystem:
    """
    Structured representation of the first-step matrix ``A`` and of ``W``.

    Every matrix block is ``shift * I + scale * K_N``; only the shifts and
    one Toeplitz operator are stored.
    """

    n_space: int
    n_blocks: int
    Kn: KnOperator
    sigma: float
    h_beta: float
    kappa: float
    A0_shift: float
    A1_shift: float
    tail_shifts: np.ndarray
    A_shift: float
    B_shift: float
    weights: L21SigmaWeights
    wsgd: WsgdWeights

    @property
    def size(self):
        return self.n_space * self.n_blocks

    def shifted(self, shift, scale):
        """Toeplitz operator ``shift * I + scale * K_N``."""
        col = scale * self.Kn.op.first_col
        row = scale * self.Kn.op.first_row
        col[0] += shift
        row[0] = col[0]
        return ToeplitzOperator(col, row)

    @property
    def A0(self):
        return self.shifted(self.A0_shift, -self.sigma)

    @property
    def A1(self):
        return self.shifted(self.A1_shift, -(1.0 - self.sigma))

    @property
    def A(self):
        return self.shifted(self.A_shift, -self.sigma)

    @property
    def B(self):
        return self.shifted(self.B_shift, 1.0 - self.sigma)

    def block_shifts(self):
        """Identity coefficients of ``A_0, A_1, ..., A_{n_blocks-1}``."""
        return np.concatenate(([self.A0_shift, self.A1_shift], self.tail_shifts))[
            : self.n_blocks
        ]


@dataclass(frozen=True)
class MittagLefflerParams:
    mu: float
    nu: float
    tolerance: float = 1e-15
    max_terms: int = 500


def _ml_scalar(mu, nu, z, tolerance, max_terms):
    total = 0.0
    prev = math.inf
    for k in range(max_terms):
        arg = mu * k + nu
        if z == 0.0:
            term = 1.0 / math.gamma(nu) if k == 0 else 0.0
        else:
            mag = math.exp(k * math.log(abs(z)) - math.lgamma(arg))
            term = mag * (-1.0 if (z < 0 and k % 2) else 1.0)
        total += term
        if abs(term) <= tolerance * abs(total) and abs(term) <= prev:
            return total
        prev = abs(term)
    raise ArithmeticError(
        f"Mittag-Leffler series did not converge in {max_terms} terms "
        f"(mu={mu}, nu={nu}, z={z})"
    )


def mittag_leffler(mu, nu, z, tolerance=1e-15, max_terms=500):
    """
    Two-parameter Mittag-Leffler function ``E_{mu,nu}(z)`` by its power series.

    Meant for moderate arguments (``|z| <= 10``); the series is summed until a
    term falls below ``tolerance`` relative to the running sum.
    """
    if not (mu > 0 and nu > 0):
        raise DomainError(f"mu and nu must be positive, got mu={mu}, nu={nu}")
    if np.ndim(z) == 0:
        return _ml_scalar(mu, nu, float(z), tolerance, max_terms)
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    for i, zi in np.ndenumerate(z):
        out[i] = _ml_scalar(mu, nu, float(zi), tolerance, max_terms)
    return out


def _gamma_ratio(p, beta):
    # Gamma(p + 1) / Gamma(p + 1 - beta)
    return math.exp(math.lgamma(p + 1.0) - math.lgamma(p + 1.0 - beta))


def example1_problem(alpha, beta, N, M, e1=20.0, e2=0.02, T=1.0):
    """
    Manufactured test problem with exact solution ``exp(2t) x^2 (1 - x)^2``.

    ``L = 1``; ``T`` defaults to 1. The source is built so that the exact solution satisfies
    the continuous equation; its time factor uses ``E_{1, 2-alpha}``.
    """
    r2, r3, r4 = (_gamma_ratio(p, beta) for p in (2, 3, 4))

    def exact(x, t):
        x = np.asarray(x, dtype=float)
        return np.exp(2.0 * t) * x**2 * (1.0 - x) ** 2

    def u0(x):
        return exact(x, 0.0)

    def source(x, t):
        x = np.asarray(x, dtype=float)
        y = 1.0 - x
        dt = 2.0 * t ** (1.0 - alpha) * mittag_leffler(1.0, 2.0 - alpha, 2.0 * t)
        space = (
            r2 * (e1 * x ** (2 - beta) + e2 * y ** (2 - beta))
            - 2.0 * r3 * (e1 * x ** (3 - beta) + e2 * y ** (3 - beta))
            + r4 * (e1 * x ** (4 - beta) + e2 * y ** (4 - beta))
        )
        return dt * x**2 * y**2 - math.exp(2.0 * t) * space

    return ProblemSpec(
        alpha=alpha, beta=beta, e1=e1, e2=e2, L=1.0, T=float(T), N=int(N), M=int(M),
        u0=u0, source=source, exact=exact,
    )


def assemble_system(p: ProblemSpec) -> BlttSystem:
    n = p.N - 1
    wsgd = wsgd_weights(p.beta, p.N + 1)
    tw = l21_sigma_weights(p.alpha, p.tau, max(p.N, p.M) + 2)
    hb = p.h**p.beta
    c = tw.c
    return BlttSystem(
        n_space=n,
        n_blocks=p.M - 1,
        Kn=KnOperator(p.e1, p.e2, g_beta(wsgd, n)),
        sigma=tw.sigma,
        h_beta=hb,
        kappa=tw.kappa,
        A0_shift=hb * c[0],
        A1_shift=hb * (c[1] - c[0]),
        tail_shifts=hb * (c[2 : p.M - 1] - c[1 : p.M - 2]),
        A_shift=hb * tw.c0_first_step,
        B_shift=hb * tw.c0_first_step,
        weights=tw,
        wsgd=wsgd,
    )


def _as_blocks(sys, u):
    u = np.asarray(u)
    if u.shape != (sys.size,):
        raise ValueError(f"expected vector of length {sys.size}, got shape {u.shape}")
    return u.reshape(sys.n_blocks, sys.n_space)


def apply_W(sys: BlttSystem, u):
    """``W u`` in ``O(M N log(M N))``: one batched Toeplitz product plus a time convolution."""
    U = _as_blocks(sys, u)
    KU = sys.Kn.apply(U)
    R = sys.A0_shift * U - sys.sigma * KU
    R[1:] += sys.A1_shift * U[:-1] - (1.0 - sys.sigma) * KU[:-1]
    if sys.n_blocks > 2 and len(sys.tail_shifts):
        kernel = np.concatenate(([0.0, 0.0], sys.tail_shifts))[:, None]
        R[2:] += scipy.signal.fftconvolve(kernel, U, axes=0)[2 : sys.n_blocks]
    return R.reshape(-1)


def first_step_rhs(sys: BlttSystem, p: ProblemSpec):
    """``y_0 = B u^0 + h^beta f(., sigma tau)``."""
    x = p.x
    u0 = np.asarray(p.u0(x), dtype=float)
    return sys.B.matvec(u0) + sys.h_beta * np.asarray(p.source(x, sys.sigma * p.tau))


def all_at_once_rhs(sys: BlttSystem, p: ProblemSpec, u1):
    """Stacked right-hand side ``[y_1; ...; y_{M-1}]`` given the first step ``u^1``."""
    x = p.x
    u1 = np.asarray(u1, dtype=float)
    u0 = np.asarray(p.u0(x), dtype=float)
    tw = sys.weights
    k = np.arange(1, p.M)
    vk = tw.v[k]
    ck1 = tw.c[k - 1]
    F = np.stack([p.source(x, (kk + sys.sigma) * p.tau) for kk in k])
    Y = sys.h_beta * (
        -(vk - ck1)[:, None] * u1[None, :] + vk[:, None] * u0[None, :] + F
    )
    Y[0] += (1.0 - sys.sigma) * sys.Kn.apply(u1)
    return Y.reshape(-1)


def _shift_matrix(m, k):
    return np.eye(m, k=-k)


def dense_materialize_W(sys: BlttSystem, cap=W_DENSE_CAP):
    """Dense ``W`` assembled block by block (oracle for small sizes)."""
    if sys.size > cap:
        raise DenseCapExceeded(f"W has {sys.size} unknowns, dense cap is {cap}")
    m, n = sys.n_blocks, sys.n_space
    K = sys.Kn.todense(cap=max(cap, n))
    I = np.eye(n)
    blocks = [sys.A0_shift * I - sys.sigma * K]
    if m > 1:
        blocks.append(sys.A1_shift * I - (1.0 - sys.sigma) * K)
    blocks.extend(d * I for d in sys.tail_shifts[: max(m - 2, 0)])
    W = np.zeros((m * n, m * n))
    for k, blk in enumerate(blocks):
        W += np.kron(_shift_matrix(m, k), blk)
    return W
