import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bltt.coeffs import wsgd_weights
from bltt.errors import DenseCapExceeded, SingularOperatorError
from bltt.precond import skew_first_col, strang_first_col
from bltt.structured import (
    CirculantOperator,
    SkewCirculantOperator,
    ToeplitzOperator,
    circulant_from_first_col,
    dense_materialize,
    fwd,
    inv,
    skew_circulant_from_first_col,
    structured_apply,
    structured_solve,
    toeplitz_from_cols,
    toeplitz_matvec,
)
from bltt.assembly import g_beta


def dense_toeplitz(col, row):
    n = len(col)
    return np.array([[col[i - j] if i >= j else row[j - i] for j in range(n)] for i in range(n)])


def dense_circulant(c):
    n = len(c)
    return np.array([[c[(i - j) % n] for j in range(n)] for i in range(n)])


def dense_skew(c):
    n = len(c)
    return np.array([[c[i - j] if i >= j else -c[n + i - j] for j in range(n)] for i in range(n)])


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_toeplitz_identity():
    T = toeplitz_from_cols([1.0, 0, 0], [1.0, 0, 0])
    np.testing.assert_array_equal(T.todense(), np.eye(3))
    v = np.array([3.0, -1.0, 2.0])
    np.testing.assert_allclose(toeplitz_matvec(T, v), v, atol=1e-15)


def test_toeplitz_corner_mismatch():
    with pytest.raises(ValueError, match="corner"):
        ToeplitzOperator([1.0, 2.0], [1.5, 3.0])


def test_toeplitz_random_small(rng):
    col, row = rng.standard_normal(8), rng.standard_normal(8)
    row[0] = col[0]
    T = ToeplitzOperator(col, row)
    np.testing.assert_array_equal(T.todense(), dense_toeplitz(col, row))
    v = rng.standard_normal(6)
    c6, r6 = col[:6], row[:6]
    np.testing.assert_allclose(ToeplitzOperator(c6, r6).matvec(v), dense_toeplitz(c6, r6) @ v, rtol=1e-13)


def test_g_beta_display_pattern():
    w = wsgd_weights(1.5, 10)
    G = g_beta(w, 4).todense()
    om = w.omega
    np.testing.assert_allclose(np.diag(G), om[1])
    np.testing.assert_allclose(np.diag(G, 1), om[0])
    assert np.all(np.triu(G, 2) == 0)
    np.testing.assert_allclose(G[:, 0], om[1:5])
    G5 = dense_materialize(g_beta(w, 5))
    np.testing.assert_allclose(G5[4, 0], om[5])


def test_g_beta_row_sums():
    G = g_beta(wsgd_weights(1.1, 20), 10)
    np.testing.assert_allclose(G.matvec(np.ones(10)), G.todense().sum(axis=1), rtol=1e-12, atol=1e-14)


def test_toeplitz_embedding_100_random(rng):
    for _ in range(100):
        n = int(rng.integers(4, 201))
        col, row = rng.standard_normal(n), rng.standard_normal(n)
        row[0] = col[0]
        pad = bool(rng.integers(2))
        T = ToeplitzOperator(col, row, pad=pad)
        v = rng.standard_normal(n)
        ref = dense_toeplitz(col, row) @ v
        assert np.linalg.norm(T.matvec(v) - ref) <= 1e-12 * np.linalg.norm(ref)


def test_toeplitz_batched_and_transpose(rng):
    n = 7
    col, row = rng.standard_normal(n), rng.standard_normal(n)
    row[0] = col[0]
    T = ToeplitzOperator(col, row)
    V = rng.standard_normal((3, n))
    np.testing.assert_allclose(T.matvec(V), V @ T.todense().T, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(T.T.todense(), T.todense().T)


def test_dense_cap():
    T = ToeplitzOperator(np.ones(5), np.ones(5))
    with pytest.raises(DenseCapExceeded):
        T.todense(cap=4)


def test_transform_round_trip(rng):
    x = rng.standard_normal(37) + 1j * rng.standard_normal(37)
    np.testing.assert_allclose(inv(fwd(x)), x, atol=1e-13)


def test_circulant_identity_and_shift():
    I = circulant_from_first_col([1.0, 0.0, 0.0])
    np.testing.assert_allclose(I.todense(), np.eye(3))
    S = circulant_from_first_col([0.0, 1.0, 0.0])
    np.testing.assert_allclose(S.apply(np.array([1.0, 0, 0])), [0, 1, 0], atol=1e-15)
    roots = np.exp(-2j * np.pi * np.arange(3) / 3)
    dist = np.abs(S.eigenvalues[:, None] - roots[None, :]).min(axis=1)
    assert dist.max() < 1e-15


def test_strang_circulant_definition():
    w = wsgd_weights(1.1, 12)
    c = strang_first_col(w.omega, 9)
    C = circulant_from_first_col(c)
    np.testing.assert_allclose(C.todense(), dense_circulant(c), atol=1e-15)
    # central band agrees with G_beta, wrap-around carries omega_0
    assert c[-1] == w.omega[0]
    np.testing.assert_allclose(c[:5], w.omega[1:6])


def test_skew_identity():
    S = skew_circulant_from_first_col(np.eye(5)[0])
    np.testing.assert_allclose(S.eigenvalues, 1.0, atol=1e-15)
    np.testing.assert_allclose(S.todense(), np.eye(5))


def test_skew_corner_sign():
    S = skew_circulant_from_first_col([0.0, 1.0, 0.0, 0.0])
    assert S.todense()[0, 3] == -1.0
    np.testing.assert_allclose(S.todense(), dense_skew([0.0, 1.0, 0.0, 0.0]))


def test_sk_g_beta_display():
    w = wsgd_weights(1.4, 12)
    c = skew_first_col(w.omega, 8)
    D = SkewCirculantOperator.from_first_col(c).todense()
    G = g_beta(w, 8).todense()
    assert D[-1, 0] == -w.omega[0]
    # same lower band as G_beta apart from the corner
    mask = np.tril(np.ones((8, 8), dtype=bool))
    mask[-1, 0] = False
    np.testing.assert_allclose(D[mask], G[mask])
    np.testing.assert_allclose(D[0, 1], w.omega[0])


def test_diagonalization_100_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 257))
        c = rng.standard_normal(n)
        for cls, ref in ((CirculantOperator, dense_circulant), (SkewCirculantOperator, dense_skew)):
            op = cls.from_first_col(c)
            # reconstruct from the spectral form column by column
            recon = op.apply(np.eye(n))
            np.testing.assert_allclose(recon.T, ref(c), atol=1e-11)
            np.testing.assert_allclose(op.todense(), ref(c), atol=1e-15)


def test_basis_vector_round_trip(rng):
    c = rng.standard_normal(11)
    for op in (CirculantOperator.from_first_col(c), SkewCirculantOperator.from_first_col(c)):
        np.testing.assert_allclose(op.apply(np.eye(11)[0]), c, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, st.integers(2, 40), elements=finite),
    st.floats(-5, 5),
    st.integers(0, 2**32 - 1),
)
def test_linearity(c, a, seed):
    r = np.random.default_rng(seed)
    u, v = r.standard_normal((2, len(c)))
    for op in (CirculantOperator.from_first_col(c), SkewCirculantOperator.from_first_col(c)):
        lhs = structured_apply(op, a * u + v)
        rhs = a * structured_apply(op, u) + structured_apply(op, v)
        scale = 1 + np.abs(c).sum() * (abs(a) + 1) * (np.abs(u).max() + np.abs(v).max())
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale)


def test_solve_trivial():
    v = np.array([1.0, -2.0, 4.0, 0.5])
    I = SkewCirculantOperator.from_first_col(np.eye(4)[0])
    np.testing.assert_allclose(structured_solve(I, v), v, atol=1e-15)
    two = CirculantOperator.from_first_col(2 * np.eye(4)[0])
    np.testing.assert_allclose(structured_solve(two, v), v / 2, atol=1e-15)


def test_solve_round_trip(rng):
    n = 30
    c = rng.standard_normal(n) * 0.1
    c[0] = 5.0
    S = SkewCirculantOperator.from_first_col(c)
    v = rng.standard_normal(n)
    np.testing.assert_allclose(S.apply(structured_solve(S, v)), v, rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(structured_solve(S, v), np.linalg.solve(dense_skew(c), v), rtol=1e-11)


def test_solve_singular():
    C = CirculantOperator.from_first_col(np.ones(4))
    with pytest.raises(SingularOperatorError, match="eigenvalue"):
        C.solve(np.ones(4))
