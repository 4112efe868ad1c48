"""Two-stage solve of the first step and the all-at-once system."""
from dataclasses import dataclass, field
import time

import numpy as np

from . import krylov
from .assembly import BlttSystem, ProblemSpec, all_at_once_rhs, apply_W, assemble_system, first_step_rhs
from .baselines import error_metrics, solve_bfs, solve_bs
from .precond import (
    ExactToeplitzSolve,
    build_block_preconditioner,
    build_inner_preconditioner,
    toeplitz_inverse_setup,
)

__all__ = ["METHODS", "SolveReport", "solve_bltt", "method_parts"]

METHODS = ("bs", "bfs", "sk2_bicgstab", "sk2_fgmres", "s2_bicgstab", "s2_fgmres")

_KIND = {"sk2": "skew_circulant", "s2": "strang_circulant"}
_OUTER = {"bicgstab": krylov.bicgstab, "fgmres": krylov.fgmres}


def method_parts(method):
    """``"sk2_fgmres" -> ("skew_circulant", "fgmres")``."""
    if method not in METHODS or method in ("bs", "bfs"):
        raise ValueError(f"unknown preconditioned method {method!r}; expected one of {METHODS[2:]}")
    family, solver = method.split("_")
    return _KIND[family], solver


@dataclass
class SolveReport:
    method: str
    iter1: int = 0
    iter2: int = 0
    iter3: int = 0
    residual_history_1: list = field(default_factory=list)
    residual_history_2: list = field(default_factory=list)
    converged_1: bool = True
    converged_2: bool = True
    wall_time: float = 0.0
    error1: float = None
    error2: float = None

    @property
    def converged(self):
        return self.converged_1 and self.converged_2

    @property
    def iterations(self):
        return self.iter1 + self.iter2


def solve_bltt(
    p: ProblemSpec,
    method="sk2_bicgstab",
    tol_outer=1e-8,
    tol_inner=1e-3,
    maxit=1000,
    *,
    inner_solver=None,
    restart=None,
    exact_inner=False,
    sys: BlttSystem = None,
):
    """
    Solve ``A u^1 = y_0`` and then ``W u = y``.

    For the preconditioned methods, stage one runs the outer Krylov method
    on ``A`` with ``P_sk`` (``sk2_*``) or ``P_s`` (``s2_*``). Stage two runs it
    on ``W`` with ``P_W``, whose ``A_0`` solves use the inversion formula set
    up once by inner iterations with the same circulant-type preconditioner.
    ``inner_solver`` defaults to the outer method.

    Returns
    -------
    u_all : (N-1, M) array
        Columns ``u^1 .. u^M``.
    report : SolveReport
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    sys = assemble_system(p) if sys is None else sys
    report = SolveReport(method)

    if method in ("bs", "bfs"):
        start = time.perf_counter()
        u_all = solve_bs(p, sys) if method == "bs" else solve_bfs(p, sys)
        report.wall_time = time.perf_counter() - start
    else:
        kind, outer = method_parts(method)
        solve = _OUTER[outer]
        extra = {"restart": restart} if outer == "fgmres" else {}
        start = time.perf_counter()

        P = build_inner_preconditioner(kind, sys)
        r1 = solve(sys.A.matvec, first_step_rhs(sys, p), P.solve, tol=tol_outer, maxit=maxit, **extra)
        u1 = r1.x
        report.iter1, report.residual_history_1, report.converged_1 = (
            r1.iterations, r1.residuals, r1.converged,
        )

        if exact_inner:
            a0 = ExactToeplitzSolve(sys.A0)
        else:
            a0 = toeplitz_inverse_setup(
                sys, P, inner_solver=inner_solver or outer, tol_inner=tol_inner, maxit=maxit,
            )
        pw = build_block_preconditioner(sys, a0)
        r2 = solve(
            lambda u: apply_W(sys, u), all_at_once_rhs(sys, p, u1), pw.apply_inverse,
            tol=tol_outer, maxit=maxit, **extra,
        )
        report.wall_time = time.perf_counter() - start
        report.iter2, report.residual_history_2, report.converged_2 = (
            r2.iterations, r2.residuals, r2.converged,
        )
        report.iter3 = a0.iter3
        u_all = np.column_stack([u1, r2.x.reshape(sys.n_blocks, sys.n_space).T])

    if p.exact is not None:
        report.error1, report.error2 = error_metrics(u_all, p)
    return u_all, report
