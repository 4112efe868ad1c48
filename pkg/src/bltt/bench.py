"""
Dense diagnostics and the experiment runner.

Condition numbers and spectra are computed from dense matrices and are
therefore limited to small sizes (``W_DENSE_CAP`` unknowns for anything
involving ``W``, ``A0_DENSE_CAP`` for ``A_0``-level matrices).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np
import scipy.linalg

from .assembly import W_DENSE_CAP, assemble_system, dense_materialize_W, example1_problem
from .baselines import A0_DENSE_CAP
from .errors import ConfigError, DenseCapExceeded, DomainError
from .pipeline import METHODS, solve_bltt
from .precond import build_inner_preconditioner

__all__ = [
    "SPECTRUM_KINDS",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "ResultRow",
    "dense_operators",
    "condition_number",
    "condition_report",
    "condition_table",
    "block_lower_eigvals",
    "sorted_spectrum",
    "write_spectrum",
    "spectrum",
    "spectrum_dump",
    "run_experiments",
    "write_rows",
]

log = logging.getLogger(__name__)

SPECTRUM_KINDS = ("W", "PW_inv_W", "A0", "Ps_inv_A0", "Psk_inv_A0")
CSV_COLUMNS = (
    "method", "alpha", "beta", "N", "M", "iter1", "iter2", "iter3",
    "time_seconds", "error1", "error2", "converged",
)


def _check_caps(sys, which):
    if which in ("W", "PW_inv_W") and sys.size > W_DENSE_CAP:
        raise DenseCapExceeded(f"W has {sys.size} unknowns, dense cap is {W_DENSE_CAP}")
    if sys.n_space > A0_DENSE_CAP:
        raise DenseCapExceeded(f"A_0 has order {sys.n_space}, dense cap is {A0_DENSE_CAP}")


def dense_operators(p, which=SPECTRUM_KINDS):
    """
    Dense forms of ``W``, ``P_W^{-1} W``, ``A_0``, ``P_s^{-1} A_0`` and
    ``P_sk^{-1} A_0``, keyed by :data:`SPECTRUM_KINDS` names. ``P_W`` uses
    exact ``A_0`` blocks.
    """
    sys = assemble_system(p)
    for w in which:
        if w not in SPECTRUM_KINDS:
            raise ValueError(f"unknown matrix {w!r}; expected one of {SPECTRUM_KINDS}")
        _check_caps(sys, w)
    A0 = sys.A0.todense(cap=A0_DENSE_CAP)
    out = {}
    if "W" in which or "PW_inv_W" in which:
        W = dense_materialize_W(sys)
        if "W" in which:
            out["W"] = W
        if "PW_inv_W" in which:
            out["PW_inv_W"] = _pw_inv_times(sys, A0, W)
    if "A0" in which:
        out["A0"] = A0
    for name, kind in (("Ps_inv_A0", "strang_circulant"), ("Psk_inv_A0", "skew_circulant")):
        if name in which:
            P = build_inner_preconditioner(kind, sys).todense(cap=A0_DENSE_CAP)
            out[name] = scipy.linalg.solve(P, A0)
    return {w: out[w] for w in which}


def _pw_inv_times(sys, A0, X):
    # block forward substitution keeps the strictly upper blocks exactly zero,
    # which pivoted LU on the assembled P_W does not
    n, m = sys.n_space, sys.n_blocks
    lu = scipy.linalg.lu_factor(A0)
    A1 = sys.A1.todense(cap=A0_DENSE_CAP)
    Xb = X.reshape(m, n, -1)
    Z = np.empty_like(Xb)
    Z[0] = scipy.linalg.lu_solve(lu, Xb[0])
    for k in range(1, m):
        Z[k] = scipy.linalg.lu_solve(lu, Xb[k] - A1 @ Z[k - 1])
    return Z.reshape(X.shape)


def block_lower_eigvals(a, block):
    """
    Eigenvalues of a matrix, using its diagonal blocks when every strictly
    upper block is exactly zero.

    For a block lower triangular matrix the spectrum is the union of the
    spectra of the diagonal blocks. Working block by block avoids the
    ``eps**(1/m)`` scatter a dense eigensolver produces for defective
    eigenvalues such as the repeated 1 of ``P_W^{-1} W``.
    """
    a = np.asarray(a)
    size = a.shape[0]
    if block <= 0 or size % block:
        return scipy.linalg.eigvals(a)
    m = size // block
    upper_zero = all(not np.any(a[k * block : (k + 1) * block, (k + 1) * block :]) for k in range(m))
    if not upper_zero:
        return scipy.linalg.eigvals(a)
    return np.concatenate(
        [scipy.linalg.eigvals(a[k * block : (k + 1) * block, k * block : (k + 1) * block]) for k in range(m)]
    )


def sorted_spectrum(ev):
    """Sort eigenvalues by real part, then imaginary part."""
    ev = np.asarray(ev, dtype=complex)
    return ev[np.lexsort((ev.imag, ev.real))]


def condition_number(a):
    """2-norm condition number from the singular values."""
    s = scipy.linalg.svdvals(a)
    return float(s[0] / s[-1])


def condition_report(p):
    """Dict of 2-norm condition numbers keyed by :data:`SPECTRUM_KINDS`."""
    return condition_table(dense_operators(p))


def condition_table(matrices):
    """Condition numbers of a mapping of dense matrices."""
    return {k: condition_number(m) for k, m in matrices.items()}


def spectrum(p, which):
    """Eigenvalues of one dense diagnostic matrix, sorted by real then imaginary part."""
    a = dense_operators(p, (which,))[which]
    block = p.N - 1 if which in ("W", "PW_inv_W") else a.shape[0]
    return sorted_spectrum(block_lower_eigvals(a, block))


def write_spectrum(ev, out):
    """Write eigenvalues as a two-column ``re,im`` CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("re", "im"))
    for z in ev:
        writer.writerow((repr(float(z.real)), repr(float(z.imag))))
    Path(out).write_text(buf.getvalue(), encoding="utf-8", newline="")


def spectrum_dump(p, which, out):
    """Write the spectrum as a two-column ``re,im`` CSV and return the eigenvalues."""
    ev = spectrum(p, which)
    write_spectrum(ev, out)
    return ev


@dataclass
class ExperimentConfig:
    alpha: float
    beta: float
    N: int
    M: int
    e1: float = 20.0
    e2: float = 0.02
    L: float = 1.0
    T: float = 1.0
    methods: list = field(default_factory=lambda: ["sk2_bicgstab"])
    tol_outer: float = 1e-8
    tol_inner: float = 1e-3
    maxit: int = 1000
    seed: int = 0
    output_path: str = "results"

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; supported: {list(METHODS)}")
        if self.L != 1.0:
            raise ConfigError("the manufactured test problem is defined on [0, 1]; L must be 1")
        if not (0 < self.tol_outer < 1 and 0 < self.tol_inner < 1):
            raise ConfigError("tolerances must lie in (0, 1)")
        if self.maxit < 1:
            raise ConfigError("maxit must be positive")
        try:
            self.problem()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        missing = sorted(f for f in ("alpha", "beta", "N", "M") if f not in d)
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def problem(self):
        return example1_problem(self.alpha, self.beta, self.N, self.M, e1=self.e1, e2=self.e2, T=self.T)


@dataclass
class ResultRow:
    method: str
    alpha: float
    beta: float
    N: int
    M: int
    iter1: int = 0
    iter2: int = 0
    iter3: int = 0
    time_seconds: float = math.nan
    error1: float = math.nan
    error2: float = math.nan
    converged: bool = False

    def formatted(self):
        """Row as strings: errors with 4 significant digits, counts as integers."""
        return {
            "method": self.method,
            "alpha": repr(float(self.alpha)),
            "beta": repr(float(self.beta)),
            "N": str(int(self.N)),
            "M": str(int(self.M)),
            "iter1": str(int(self.iter1)),
            "iter2": str(int(self.iter2)),
            "iter3": str(int(self.iter3)),
            "time_seconds": f"{self.time_seconds:.6f}",
            "error1": f"{self.error1:.4e}",
            "error2": f"{self.error2:.4e}",
            "converged": "true" if self.converged else "false",
        }


def _run_one(cfg, p, method):
    row = ResultRow(method, cfg.alpha, cfg.beta, cfg.N, cfg.M)
    try:
        _, rep = solve_bltt(
            p, method, tol_outer=cfg.tol_outer, tol_inner=cfg.tol_inner, maxit=cfg.maxit,
        )
    except (ArithmeticError, MemoryError, np.linalg.LinAlgError, RuntimeError) as exc:
        log.warning("%s failed: %s", method, exc)
        return row
    row.iter1, row.iter2, row.iter3 = rep.iter1, rep.iter2, rep.iter3
    row.time_seconds = rep.wall_time
    row.error1 = math.nan if rep.error1 is None else rep.error1
    row.error2 = math.nan if rep.error2 is None else rep.error2
    row.converged = rep.converged
    return row


def write_rows(rows, output_path):
    """Write ``<output_path>.csv`` and its JSON mirror ``<output_path>.json``."""
    base = Path(output_path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    formatted = [r.formatted() for r in rows]

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(formatted)
    csv_path = base.with_suffix(".csv")
    csv_path.write_text(buf.getvalue(), encoding="utf-8", newline="")

    records = []
    for r in rows:
        rec = asdict(r)
        for k in ("time_seconds", "error1", "error2"):
            rec[k] = None if math.isnan(rec[k]) else rec[k]
        records.append(rec)
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8", newline="")
    return csv_path, json_path


def run_experiments(cfg: ExperimentConfig, workers=1, write=True):
    """
    Run every configured method on the test problem and persist the rows.

    A method that fails is recorded with ``converged = False`` and the run
    continues. Rows keep the order of ``cfg.methods``.
    """
    p = cfg.problem()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda m: _run_one(cfg, p, m), cfg.methods))
    else:
        rows = [_run_one(cfg, p, m) for m in cfg.methods]
    if write:
        write_rows(rows, cfg.output_path)
    return rows
