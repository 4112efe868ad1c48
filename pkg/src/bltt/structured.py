"""
FFT-backed Toeplitz, circulant and skew-circulant operators.

All transforms go through :func:`fwd` / :func:`inv`, which are the
unnormalized DFT and its exact inverse (``inv(fwd(x)) == x``). A circulant
``C`` with first column ``c`` is ``C = inv . diag(fwd(c)) . fwd``; a
skew-circulant ``S`` adds the modulation ``Omega = diag(exp(-i pi k / n))``:
``S = Omega^* . inv . diag(fwd(Omega c)) . fwd . Omega``.

Every operator acts along the last axis, so a stack of vectors of shape
``(m, n)`` is handled in one call.
"""
import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DenseCapExceeded, SingularOperatorError

__all__ = [
    "ToeplitzOperator",
    "CirculantOperator",
    "SkewCirculantOperator",
    "fwd",
    "inv",
    "skew_modulation",
    "toeplitz_from_cols",
    "toeplitz_matvec",
    "circulant_from_first_col",
    "skew_circulant_from_first_col",
    "structured_apply",
    "structured_solve",
    "dense_materialize",
    "DENSE_CAP",
    "SINGULAR_RTOL",
]

DENSE_CAP = 1024
SINGULAR_RTOL = 1e-14


def fwd(x):
    return scipy.fft.fft(x, axis=-1)


def inv(x):
    return scipy.fft.ifft(x, axis=-1)


def skew_modulation(n):
    """Diagonal of ``Omega``, ``exp(-i pi k / n)`` for ``k = 0..n-1``."""
    return np.exp(-1j * np.pi * np.arange(n) / n)


def _real_if(x, *inputs):
    if all(not np.iscomplexobj(a) for a in inputs):
        return x.real
    return x


def _check_len(v, n):
    v = np.asarray(v)
    if v.shape[-1:] != (n,):
        raise ValueError(f"expected trailing dimension {n}, got shape {v.shape}")
    return v


def _check_cap(n, cap):
    if n > cap:
        raise DenseCapExceeded(f"order {n} exceeds dense cap {cap}")


class ToeplitzOperator:
    """
    Square Toeplitz matrix given by its first column and first row.

    Products use a circulant embedding of length ``>= 2n - 1``; with
    ``pad=True`` the length is rounded up to a fast FFT size.
    """

    def __init__(self, first_col, first_row, *, pad=True):
        col = np.asarray(first_col)
        row = np.asarray(first_row)
        if col.ndim != 1 or col.shape != row.shape:
            raise ValueError("first_col and first_row must be 1-D of equal length")
        if col[0] != row[0]:
            raise ValueError(
                f"corner mismatch: first_col[0]={col[0]!r}, first_row[0]={row[0]!r}"
            )
        self.n = len(col)
        self.first_col = col
        self.first_row = row
        size = 2 * self.n - 1
        if pad:
            size = scipy.fft.next_fast_len(size)
        embed = np.zeros(size, dtype=np.result_type(col, row))
        embed[: self.n] = col
        if self.n > 1:
            embed[-(self.n - 1):] = row[:0:-1]
        self._size = size
        self._eig = fwd(embed)

    @property
    def dtype(self):
        return np.result_type(self.first_col, self.first_row)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def T(self):
        return ToeplitzOperator(self.first_row, self.first_col)

    def matvec(self, v):
        v = _check_len(v, self.n)
        y = inv(self._eig * scipy.fft.fft(v, n=self._size, axis=-1))[..., : self.n]
        return _real_if(y, v, self.first_col, self.first_row)

    def __matmul__(self, v):
        return self.matvec(v)

    def todense(self, cap=DENSE_CAP):
        _check_cap(self.n, cap)
        return scipy.linalg.toeplitz(self.first_col, self.first_row)

    def __repr__(self):
        return f"ToeplitzOperator(n={self.n})"


class _DiagonalizedOperator:
    """Shared machinery for operators diagonalized by the DFT."""

    modulation = None

    def __init__(self, eigenvalues, first_col=None):
        self.eigenvalues = np.asarray(eigenvalues, dtype=complex)
        self.n = len(self.eigenvalues)
        self._first_col = None if first_col is None else np.asarray(first_col)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def real_valued(self):
        return self._first_col is not None and not np.iscomplexobj(self._first_col)

    def _to_freq(self, v):
        if self.modulation is not None:
            v = self.modulation * v
        return fwd(v)

    def _from_freq(self, z):
        y = inv(z)
        if self.modulation is not None:
            y = y * self.modulation.conj()
        return y

    def apply(self, v):
        v = _check_len(v, self.n)
        y = self._from_freq(self.eigenvalues * self._to_freq(v))
        return y.real if self.real_valued and not np.iscomplexobj(v) else y

    def __matmul__(self, v):
        return self.apply(v)

    def check_nonsingular(self, rtol=SINGULAR_RTOL):
        mags = np.abs(self.eigenvalues)
        lo, hi = mags.min(), mags.max()
        if not lo > rtol * hi:
            raise SingularOperatorError(
                f"near-singular operator: min |eigenvalue| = {lo:.3e}, "
                f"max |eigenvalue| = {hi:.3e}"
            )

    def solve(self, v, rtol=SINGULAR_RTOL):
        self.check_nonsingular(rtol)
        v = _check_len(v, self.n)
        y = self._from_freq(self._to_freq(v) / self.eigenvalues)
        return y.real if self.real_valued and not np.iscomplexobj(v) else y

    @property
    def first_col(self):
        if self._first_col is not None:
            return self._first_col
        return self._from_freq(self.eigenvalues)

    def with_eigenvalues(self, eigenvalues, first_col=None):
        return type(self)(eigenvalues, first_col=first_col)


class CirculantOperator(_DiagonalizedOperator):
    """Circulant matrix ``F^{-1} diag(eigenvalues) F``."""

    @classmethod
    def from_first_col(cls, c):
        c = np.asarray(c)
        if c.ndim != 1 or len(c) < 1:
            raise ValueError("first column must be a non-empty 1-D array")
        return cls(fwd(c), first_col=c)

    def todense(self, cap=DENSE_CAP):
        _check_cap(self.n, cap)
        return scipy.linalg.circulant(self.first_col)

    def __repr__(self):
        return f"CirculantOperator(n={self.n})"


class SkewCirculantOperator(_DiagonalizedOperator):
    """Skew-circulant matrix ``Omega^* F^{-1} diag(eigenvalues) F Omega``."""

    def __init__(self, eigenvalues, first_col=None):
        super().__init__(eigenvalues, first_col)
        self.modulation = skew_modulation(self.n)

    @classmethod
    def from_first_col(cls, c):
        c = np.asarray(c)
        if c.ndim != 1 or len(c) < 2:
            raise ValueError("skew-circulant needs a 1-D first column of length >= 2")
        return cls(fwd(skew_modulation(len(c)) * c), first_col=c)

    def todense(self, cap=DENSE_CAP):
        _check_cap(self.n, cap)
        c = self.first_col
        idx = np.subtract.outer(np.arange(self.n), np.arange(self.n))
        return np.where(idx >= 0, c[idx % self.n], -c[idx % self.n])

    def __repr__(self):
        return f"SkewCirculantOperator(n={self.n})"


def toeplitz_from_cols(first_col, first_row):
    return ToeplitzOperator(first_col, first_row)


def toeplitz_matvec(T, v):
    return T.matvec(v)


def circulant_from_first_col(c):
    return CirculantOperator.from_first_col(c)


def skew_circulant_from_first_col(c):
    return SkewCirculantOperator.from_first_col(c)


def structured_apply(op, v):
    return op.apply(v)


def structured_solve(op, v):
    """``op^{-1} v`` by dividing by the eigenvalues in the transform domain."""
    return op.solve(v)


def dense_materialize(op, cap=DENSE_CAP):
    return op.todense(cap=cap)
