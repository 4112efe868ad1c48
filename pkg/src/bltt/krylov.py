"""
Right-preconditioned BiCGSTAB and flexible GMRES.

Both start from the zero vector and stop when the true relative residual
``||b - A x|| / ||b||`` drops below ``tol``. With right preconditioning that
is the residual of the original system, whatever the preconditioner.
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import BreakdownError

__all__ = ["LinearOperatorHandle", "KrylovResult", "as_operator", "bicgstab", "fgmres"]


@dataclass(frozen=True)
class LinearOperatorHandle:
    dimension: int
    apply: Callable

    def __call__(self, v):
        return self.apply(v)


class KrylovResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residuals: list
    converged: bool


def as_operator(op, n=None):
    """Turn a matrix, a callable or anything with ``matvec``/``apply`` into a callable."""
    if isinstance(op, LinearOperatorHandle):
        return op.apply
    if isinstance(op, np.ndarray):
        return lambda v: op @ v
    for name in ("matvec", "apply"):
        if hasattr(op, name):
            return getattr(op, name)
    if callable(op):
        return op
    raise TypeError(f"cannot use {type(op).__name__} as a linear operator")


def _identity(v):
    return v


def bicgstab(A, b, M=None, tol=1e-8, maxit=1000):
    """
    Right-preconditioned BiCGSTAB.

    One iteration is one full step (two products with ``A`` and two with
    ``M``). The true residual is checked after each half step; convergence
    at the half step still counts as a whole iteration.

    Parameters
    ----------
    A : operator
        System operator (see :func:`as_operator`).
    b : (n,) array
        Right-hand side.
    M : callable, optional
        Applies the inverse of the preconditioner.
    tol : float
        Relative residual target.
    maxit : int
        Iteration cap.

    Returns
    -------
    KrylovResult
        ``residuals`` holds the relative true residual after every iteration,
        starting with 1.0 for the initial guess.

    Raises
    ------
    BreakdownError
        If ``rho``, ``<r_hat, v>`` or ``omega`` vanish before convergence.
    """
    A = as_operator(A)
    M = _identity if M is None else as_operator(M)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return KrylovResult(x, 0, [0.0], True)

    r = b.copy()
    r_hat = r.copy()
    p = np.zeros_like(b)
    v = np.zeros_like(b)
    rho_old = alpha = omega = 1.0
    history = [1.0]

    for it in range(1, maxit + 1):
        rho = r_hat @ r
        if rho == 0.0:
            raise BreakdownError(f"BiCGSTAB breakdown: rho = 0 at iteration {it}")
        if it == 1:
            p = r.copy()
        else:
            beta = (rho / rho_old) * (alpha / omega)
            p = r + beta * (p - omega * v)
        p_hat = M(p)
        v = A(p_hat)
        denom = r_hat @ v
        if denom == 0.0:
            raise BreakdownError(f"BiCGSTAB breakdown: <r_hat, v> = 0 at iteration {it}")
        alpha = rho / denom
        s = r - alpha * v
        x_half = x + alpha * p_hat
        res = np.linalg.norm(b - A(x_half)) / bnorm
        if res < tol:
            history.append(res)
            return KrylovResult(x_half, it, history, True)

        s_hat = M(s)
        t = A(s_hat)
        tt = t @ t
        if tt == 0.0:
            raise BreakdownError(f"BiCGSTAB breakdown: A M^-1 s = 0 at iteration {it}")
        omega = (t @ s) / tt
        x = x_half + omega * s_hat
        r = s - omega * t
        res = np.linalg.norm(b - A(x)) / bnorm
        history.append(res)
        if res < tol:
            return KrylovResult(x, it, history, True)
        if omega == 0.0:
            raise BreakdownError(f"BiCGSTAB breakdown: omega = 0 at iteration {it}")
        rho_old = rho

    return KrylovResult(x, maxit, history, False)


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def fgmres(A, b, M=None, tol=1e-8, maxit=1000, restart=None):
    """
    Flexible GMRES (right preconditioning, preconditioner may change per step).

    One iteration is one Arnoldi step. Every preconditioned direction
    ``z_j = M(v_j)`` is stored, so ``M`` need not be a fixed linear map.
    The least-squares residual decides when to form the iterate; the true
    residual then confirms convergence (otherwise the cycle restarts from the
    current iterate). ``restart=None`` keeps the full basis up to ``maxit``.

    Returns
    -------
    KrylovResult
        ``residuals`` holds the least-squares residual estimate per
        iteration, relative to ``||b||``, starting with 1.0.
    """
    A = as_operator(A)
    M = _identity if M is None else as_operator(M)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return KrylovResult(x, 0, [0.0], True)

    history = [1.0]
    total = 0
    cycle = maxit if restart is None else int(restart)
    eps = np.finfo(float).eps
    r = b.copy()

    while total < maxit:
        beta = np.linalg.norm(r)
        V = [r / beta]
        Z = []
        H = np.zeros((cycle + 1, cycle))
        cs = np.zeros(cycle)
        sn = np.zeros(cycle)
        g = np.zeros(cycle + 1)
        g[0] = beta
        done = False
        j = -1
        for j in range(min(cycle, maxit - total)):
            Z.append(M(V[j]))
            w = A(Z[j])
            wnorm0 = np.linalg.norm(w)
            for i in range(j + 1):
                H[i, j] = V[i] @ w
                w = w - H[i, j] * V[i]
            # one reorthogonalization pass when cancellation was severe
            if np.linalg.norm(w) < 0.7 * wnorm0:
                for i in range(j + 1):
                    corr = V[i] @ w
                    H[i, j] += corr
                    w = w - corr * V[i]
            h_next = np.linalg.norm(w)
            H[j + 1, j] = h_next
            happy = h_next <= eps * wnorm0
            for i in range(j):
                hi, hi1 = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hi1
                H[i + 1, j] = -sn[i] * hi + cs[i] * hi1
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            est = abs(g[j + 1]) / bnorm
            history.append(est)
            if est < tol or happy:
                done = True
                break
            V.append(w / h_next)

        k = j + 1
        y = scipy.linalg.solve_triangular(H[:k, :k], g[:k])
        x = x + np.column_stack(Z[:k]) @ y
        r = b - A(x)
        true_res = np.linalg.norm(r) / bnorm
        if done and (true_res < tol or happy):
            return KrylovResult(x, total, history, True)

    return KrylovResult(x, total, history, False)
