"""
Fast all-at-once solvers for time-space fractional diffusion equations.

The time-stepping scheme couples every time level into one block lower
triangular Toeplitz system. This package assembles it matrix-free, solves it
with Krylov methods preconditioned by a block bi-diagonal approximation, and
inverts the diagonal Toeplitz block through skew-circulant or circulant
approximations and an inversion formula.
"""
from .assembly import (
    BlttSystem,
    ProblemSpec,
    apply_W,
    assemble_system,
    example1_problem,
    mittag_leffler,
)
from .baselines import error_metrics, solve_bfs, solve_bs
from .bench import (
    ExperimentConfig,
    ResultRow,
    condition_report,
    run_experiments,
    spectrum,
    spectrum_dump,
)
from .coeffs import l21_sigma_weights, level_coefficients, wsgd_weights
from .errors import (
    BreakdownError,
    ConfigError,
    ConvergenceError,
    DenseCapExceeded,
    DomainError,
    SingularOperatorError,
)
from .krylov import bicgstab, fgmres
from .pipeline import METHODS, SolveReport, solve_bltt
from .precond import (
    build_block_preconditioner,
    build_inner_preconditioner,
    toeplitz_inverse_setup,
)
from .structured import CirculantOperator, SkewCirculantOperator, ToeplitzOperator

__version__ = "0.1.0"
