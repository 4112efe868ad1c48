"""
Preconditioners for the first-step system and the all-at-once system.

* :class:`InnerPreconditioner` wraps the skew-circulant ``P_sk`` or the
  Strang circulant ``P_s`` approximation of ``A_0`` (and of ``A``).
* :class:`ToeplitzInverseApplicator` applies ``A_0^{-1}`` through the
  circulant/skew-circulant form of the Gohberg-Semencul inversion formula,
  once the first and last columns of ``A_0^{-1}`` are known.
* :class:`BlockBiDiagPreconditioner` keeps the first two block diagonals of
  ``W`` and is inverted by block forward substitution.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import krylov
from .assembly import BlttSystem
from .errors import ConvergenceError, DenseCapExceeded, SingularOperatorError
from .structured import (
    CirculantOperator,
    SkewCirculantOperator,
    fwd,
    inv,
    skew_modulation,
)

__all__ = [
    "INNER_KINDS",
    "InnerPreconditioner",
    "ToeplitzInverseApplicator",
    "ExactToeplitzSolve",
    "BlockBiDiagPreconditioner",
    "skew_first_col",
    "strang_first_col",
    "build_inner_preconditioner",
    "toeplitz_inverse_setup",
    "toeplitz_inverse_apply",
    "build_block_preconditioner",
    "apply_P_W_inverse",
]

INNER_KINDS = ("skew_circulant", "strang_circulant", "none")
XI1_RTOL = 1e-12
EXACT_CAP = 1024


def skew_first_col(omega, n):
    """First column ``(w_1, ..., w_{n-1}, -w_0)`` of ``sk(G_beta)``."""
    return np.append(omega[1:n], -omega[0])


def strang_first_col(omega, n):
    """First column ``(w_1, ..., w_{floor(N/2)}, 0, ..., 0, w_0)`` of ``s(G_beta)``, ``N = n + 1``."""
    half = (n + 1) // 2
    c = np.zeros(n)
    c[:half] = omega[1 : half + 1]
    c[-1] += omega[0]
    return c


@dataclass(frozen=True)
class InnerPreconditioner:
    """``shift I - sigma (e1 X + e2 X^T)`` for a circulant-type ``X`` approximating ``G_beta``."""

    kind: str
    op: Optional[object] = None

    def solve(self, v):
        if self.op is None:
            return np.array(v, dtype=float, copy=True)
        return self.op.solve(v)

    __call__ = solve

    def todense(self, cap=EXACT_CAP):
        if self.op is None:
            raise ValueError("identity preconditioner has no order")
        return self.op.todense(cap=cap).real


def build_inner_preconditioner(kind, sys: BlttSystem, shift=None):
    """
    Build ``P_sk`` (``kind="skew_circulant"``) or ``P_s`` (``"strang_circulant"``).

    The eigenvalues are combined in the transform domain:
    ``shift - sigma (e1 lam + e2 conj(lam))`` where ``lam`` are the
    eigenvalues of ``sk(G_beta)`` or ``s(G_beta)``. ``shift`` defaults to the
    identity coefficient of ``A_0``.
    """
    if kind not in INNER_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}; expected one of {INNER_KINDS}")
    if kind == "none":
        return InnerPreconditioner(kind)
    n = sys.n_space
    omega = sys.wsgd.omega
    e1, e2 = sys.Kn.e1, sys.Kn.e2
    shift = sys.A0_shift if shift is None else shift
    if kind == "skew_circulant":
        base = SkewCirculantOperator.from_first_col(skew_first_col(omega, n))
    else:
        base = CirculantOperator.from_first_col(strang_first_col(omega, n))
    lam = shift - sys.sigma * (e1 * base.eigenvalues + e2 * base.eigenvalues.conj())
    # X^T has eigenvalues conj(lam_X) in the same basis, so the result is real
    col = base.with_eigenvalues(lam).first_col.real
    op = base.with_eigenvalues(lam, first_col=col)
    op.check_nonsingular()
    return InnerPreconditioner(kind, op)


@dataclass(frozen=True)
class ToeplitzInverseApplicator:
    """
    ``T^{-1} v = (C(xi) Sk(s1) v + C(s2) Sk(xi) v) / (2 xi_1)``.

    ``xi`` and ``eta`` are the first and last columns of ``T^{-1}``;
    ``s1 = (eta_n, -eta_1, ..., -eta_{n-1})``, ``s2 = (eta_n, eta_1, ...,
    eta_{n-1})``. ``lam1 .. lam4`` are the transform-domain diagonals of
    ``C(xi)``, ``Sk(s1)``, ``C(s2)`` and ``Sk(xi)``.
    """

    xi: np.ndarray
    eta: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray
    lam4: np.ndarray
    iter3: int
    xi1: float

    @property
    def n(self):
        return len(self.xi)

    @classmethod
    def from_columns(cls, xi, eta, iter3=0):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        n = len(xi)
        if eta.shape != (n,):
            raise ValueError("xi and eta must have equal length")
        xi1 = float(xi[0])
        if not abs(xi1) > XI1_RTOL * np.linalg.norm(xi):
            raise SingularOperatorError(
                f"inversion formula breakdown: xi_1 = {xi1:.3e} is ~0 relative to |xi|"
            )
        s1 = np.concatenate(([eta[-1]], -eta[:-1]))
        s2 = np.concatenate(([eta[-1]], eta[:-1]))
        omega = skew_modulation(n)
        return cls(
            xi=xi,
            eta=eta,
            lam1=fwd(xi),
            lam2=fwd(omega * s1),
            lam3=fwd(s2),
            lam4=fwd(omega * xi),
            iter3=int(iter3),
            xi1=xi1,
        )

    def apply(self, v):
        v = np.asarray(v)
        if v.shape[-1:] != (self.n,):
            raise ValueError(f"expected trailing dimension {self.n}, got shape {v.shape}")
        omega = skew_modulation(self.n)
        vt = fwd(omega * v)
        z1 = omega.conj() * inv(self.lam2 * vt)
        z2 = omega.conj() * inv(self.lam4 * vt)
        z3 = self.lam1 * fwd(z1)
        z4 = self.lam3 * fwd(z2)
        z = inv(z3 + z4) / (2.0 * self.xi1)
        return z if np.iscomplexobj(v) else z.real

    __call__ = apply


class ExactToeplitzSolve:
    """Dense LU solve of a Toeplitz system; oracle and fallback for small orders."""

    iter3 = 0

    def __init__(self, T, cap=EXACT_CAP):
        if T.n > cap:
            raise DenseCapExceeded(f"order {T.n} exceeds dense LU cap {cap}")
        self.n = T.n
        self._lu = scipy.linalg.lu_factor(T.todense(cap=cap))

    def apply(self, v):
        v = np.asarray(v)
        if v.ndim == 1:
            return scipy.linalg.lu_solve(self._lu, v)
        return scipy.linalg.lu_solve(self._lu, v.reshape(-1, self.n).T).T.reshape(v.shape)

    __call__ = apply


_INNER_SOLVERS = {"bicgstab": krylov.bicgstab, "fgmres": krylov.fgmres}


def toeplitz_inverse_setup(
    sys: BlttSystem,
    inner: InnerPreconditioner,
    inner_solver="bicgstab",
    tol_inner=1e-3,
    first_step=False,
    exact=False,
    maxit=1000,
):
    """
    Solve ``T xi = e_1`` and ``T eta = e_n`` and build the inversion formula.

    ``T`` is ``A_0``, or ``A`` when ``first_step`` is set. The two systems are
    solved by preconditioned Krylov iterations to relative residual
    ``tol_inner`` from a zero initial guess; ``iter3`` is the total iteration
    count of the two solves. With ``exact=True`` both columns come from a dense LU
    factorization instead and ``iter3`` is 0.
    """
    if not 0.0 < tol_inner < 1.0:
        raise ValueError(f"tol_inner must lie in (0, 1), got {tol_inner}")
    T = sys.A if first_step else sys.A0
    n = T.n
    e_first = np.zeros(n)
    e_first[0] = 1.0
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    if exact:
        lu = ExactToeplitzSolve(T)
        return ToeplitzInverseApplicator.from_columns(lu.apply(e_first), lu.apply(e_last))

    try:
        solve = _INNER_SOLVERS[inner_solver]
    except KeyError:
        raise ValueError(f"unknown inner solver {inner_solver!r}") from None
    cols = []
    its = []
    for rhs in (e_first, e_last):
        res = solve(T.matvec, rhs, inner.solve, tol=tol_inner, maxit=maxit)
        if not res.converged:
            raise ConvergenceError(
                f"inner {inner_solver} did not reach {tol_inner:g} in {maxit} iterations",
                iterations=res.iterations,
                residual=res.residuals[-1],
            )
        cols.append(res.x)
        its.append(res.iterations)
    return ToeplitzInverseApplicator.from_columns(cols[0], cols[1], iter3=sum(its))


def toeplitz_inverse_apply(app, v):
    return app.apply(v)


@dataclass(frozen=True)
class BlockBiDiagPreconditioner:
    """
    Block lower bi-diagonal Toeplitz ``P_W`` with diagonal ``A_0`` and
    subdiagonal ``A_1``.

    ``a0_solve`` is any callable applying (an approximation of) ``A_0^{-1}``
    along the last axis.
    """

    a0_solve: Callable
    A1: object
    n_blocks: int
    n_space: int

    @property
    def iter3(self):
        return getattr(self.a0_solve, "iter3", 0)

    def apply_inverse(self, v):
        v = np.asarray(v)
        if v.shape != (self.n_blocks * self.n_space,):
            raise ValueError(
                f"expected vector of length {self.n_blocks * self.n_space}, got shape {v.shape}"
            )
        V = v.reshape(self.n_blocks, self.n_space)
        Z = np.empty_like(V, dtype=float)
        Z[0] = self.a0_solve(V[0])
        for k in range(1, self.n_blocks):
            Z[k] = self.a0_solve(V[k] - self.A1.matvec(Z[k - 1]))
        return Z.reshape(-1)

    __call__ = apply_inverse

    def todense(self, A0_dense, cap=4096):
        size = self.n_blocks * self.n_space
        if size > cap:
            raise DenseCapExceeded(f"P_W has {size} unknowns, dense cap is {cap}")
        m = self.n_blocks
        return np.kron(np.eye(m), A0_dense) + np.kron(
            np.eye(m, k=-1), self.A1.todense(cap=max(cap, self.n_space))
        )


def build_block_preconditioner(sys: BlttSystem, a0_solve):
    return BlockBiDiagPreconditioner(a0_solve, sys.A1, sys.n_blocks, sys.n_space)


def apply_P_W_inverse(pw: BlockBiDiagPreconditioner, v):
    return pw.apply_inverse(v)
