"""Direct reference solvers and error metrics."""
import numpy as np
import scipy.linalg

from .assembly import (
    W_DENSE_CAP,
    BlttSystem,
    ProblemSpec,
    all_at_once_rhs,
    assemble_system,
    dense_materialize_W,
    first_step_rhs,
)
from .errors import DenseCapExceeded

__all__ = ["solve_bs", "solve_bfs", "error_metrics", "A0_DENSE_CAP"]

A0_DENSE_CAP = 1024


def _stack(u1, U):
    # columns u^1 .. u^M
    return np.column_stack([u1, U.T]) if U.size else u1[:, None]


def solve_bs(p: ProblemSpec, sys: BlttSystem = None, cap=W_DENSE_CAP):
    """
    Dense direct solve: LU for the first step, then LU for the whole of ``W``.

    Returns the ``(N-1, M)`` array of ``u^1 .. u^M``.
    """
    sys = assemble_system(p) if sys is None else sys
    if sys.size > cap:
        raise DenseCapExceeded(f"W has {sys.size} unknowns, dense cap is {cap}")
    u1 = scipy.linalg.solve(sys.A.todense(), first_step_rhs(sys, p))
    W = dense_materialize_W(sys, cap=cap)
    u = scipy.linalg.solve(W, all_at_once_rhs(sys, p, u1))
    return _stack(u1, u.reshape(sys.n_blocks, sys.n_space))


def solve_bfs(p: ProblemSpec, sys: BlttSystem = None, cap=A0_DENSE_CAP):
    """
    Block forward substitution: one time step after another, reusing a single
    LU factorization of ``A_0`` and one of ``A``.
    """
    sys = assemble_system(p) if sys is None else sys
    if sys.n_space > cap:
        raise DenseCapExceeded(f"A_0 has order {sys.n_space}, dense cap is {cap}")
    lu_A = scipy.linalg.lu_factor(sys.A.todense(cap=cap), check_finite=True)
    lu_A0 = scipy.linalg.lu_factor(sys.A0.todense(cap=cap), check_finite=True)
    for lu in (lu_A, lu_A0):
        if np.any(np.diag(lu[0]) == 0.0):
            raise np.linalg.LinAlgError("singular factor in block forward substitution")

    u1 = scipy.linalg.lu_solve(lu_A, first_step_rhs(sys, p))
    Y = all_at_once_rhs(sys, p, u1).reshape(sys.n_blocks, sys.n_space)
    A1 = sys.A1
    d = sys.block_shifts()
    U = np.zeros_like(Y)
    for j in range(sys.n_blocks):
        rhs = Y[j].copy()
        if j >= 1:
            rhs -= A1.matvec(U[j - 1])
        if j >= 2:
            # sum_{k=2}^{j} d_k U[j-k]
            rhs -= d[2 : j + 1] @ U[j - 2 :: -1]
        U[j] = scipy.linalg.lu_solve(lu_A0, rhs)
    return _stack(u1, U)


def error_metrics(u_all, p: ProblemSpec):
    """
    Maximum over time levels of the grid max-norm and of the grid L2 norm.

    The L2 norm is the discrete ``sqrt(h * sum_i zeta_i^2)`` over interior
    nodes; ``u_all`` has columns ``u^1 .. u^M``.
    """
    if p.exact is None:
        raise ValueError("problem has no exact solution attached")
    u_all = np.asarray(u_all)
    x = p.x
    exact = np.column_stack([p.exact(x, t) for t in p.t[1:]])
    if exact.shape != u_all.shape:
        raise ValueError(f"expected solution of shape {exact.shape}, got {u_all.shape}")
    zeta = exact - u_all
    error1 = float(np.abs(zeta).max())
    error2 = float(np.sqrt(p.h * (zeta**2).sum(axis=0)).max())
    return error1, error2
