import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from poleshift.contour import SpectralBounds
from poleshift.pencil import (
    HermitianOperator,
    MatrixMarketError,
    NotPositiveDefiniteError,
    Pencil,
    cholesky,
    dense_generalized_eig,
    estimate_spectral_bounds,
    project_out,
    read_matrix_market,
    read_vector,
    s_norm,
    s_orthonormalize,
    write_matrix_market,
    write_vector,
)
from poleshift.problems import gen_random_pencil


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[1.0, 1j], [1j, 1.0]]))
    with pytest.raises(ValueError):
        HermitianOperator(np.ones((2, 3)))


def test_sparse_and_complex_flags():
    A = HermitianOperator(sp.csr_matrix(np.diag([1.0, 2.0])))
    assert A.sparse and A.is_real
    B = HermitianOperator(np.array([[1.0, 1j], [-1j, 2.0]]))
    assert not B.is_real


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefiniteError):
        Pencil(np.eye(2), np.diag([1.0, 0.0])).chol_S


def test_pencil_dimension_mismatch():
    with pytest.raises(ValueError):
        Pencil(np.eye(3), np.eye(2))


def test_transformed_operator_is_similar(rng):
    pencil, eig, _ = gen_random_pencil(30, condition=20, seed=3)
    C = np.array([pencil.transformed_apply(e) for e in np.eye(30)]).T
    np.testing.assert_allclose(C, C.conj().T, atol=1e-10)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(C))[::-1], eig.lambdas, rtol=1e-9)
    x = rng.standard_normal(30)
    np.testing.assert_allclose(pencil.from_transformed(pencil.chol_S.apply(x)), x, atol=1e-12)


@pytest.mark.parametrize("complex_valued", [False, True])
def test_dense_oracle_recovers_spectrum(complex_valued):
    pencil, eig, split = gen_random_pencil(60, n_negative=5, condition=50, seed=1,
                                           complex_valued=complex_valued)
    got = dense_generalized_eig(pencil)
    np.testing.assert_allclose(got.lambdas, eig.lambdas, rtol=1e-8, atol=1e-8)
    G = got.Psi.conj().T @ pencil.apply_S(got.Psi)
    np.testing.assert_allclose(G, np.eye(60), atol=1e-9)
    assert split.M_pos == 55 and split.Psi_minus.shape == (60, 5)


def test_bounds_bracket_known_spectrum():
    pencil, _, _ = gen_random_pencil(2, lambdas=[10.0, 1.0], seed=0)
    b = estimate_spectral_bounds(pencil)
    assert b.m <= 1.0 and b.M >= 10.0
    assert b.m > 0.5 and b.M < 20


def test_bounds_reject_indefinite():
    pencil, _, _ = gen_random_pencil(20, n_negative=3, seed=0)
    with pytest.raises(ValueError):
        estimate_spectral_bounds(pencil)
    neg, _, _ = gen_random_pencil(4, lambdas=[-1, -2, -3, -4], seed=0)
    with pytest.raises(ValueError):
        estimate_spectral_bounds(neg)


def test_s_norm(rng):
    x = rng.standard_normal(5)
    assert s_norm(Pencil(np.eye(5)), x) == pytest.approx(np.linalg.norm(x))
    S = np.diag([4.0, 1, 1, 1, 1])
    assert s_norm(Pencil(np.eye(5), S), x) ** 2 == pytest.approx(x @ S @ x)


def test_project_out_uses_s_inner_product(rng):
    pencil, eig, split = gen_random_pencil(40, n_negative=4, seed=2)
    # a Euclidean-orthonormal basis of the same span is S-orthonormalized first
    Q, _ = np.linalg.qr(split.Psi_minus)
    x = project_out(Q, pencil, rng.standard_normal(40))
    assert np.linalg.norm(split.Psi_minus.conj().T @ pencil.apply_S(x)) < 1e-12
    Y = s_orthonormalize(Q, pencil)
    np.testing.assert_allclose(Y.conj().T @ pencil.apply_S(Y), np.eye(4), atol=1e-12)


def test_project_out_dimension_mismatch():
    with pytest.raises(ValueError):
        project_out(np.ones((5, 1)), Pencil(np.eye(5)), np.ones(4))


def test_project_out_idempotent(rng):
    pencil, _, split = gen_random_pencil(25, n_negative=3, seed=5)
    x = project_out(split.Psi_minus, pencil, rng.standard_normal(25))
    np.testing.assert_allclose(project_out(split.Psi_minus, pencil, x), x, atol=1e-13)


@pytest.mark.parametrize("complex_valued", [False, True])
def test_matrix_market_roundtrip(tmp_path, complex_valued):
    pencil, _, _ = gen_random_pencil(12, seed=4, complex_valued=complex_valued)
    write_matrix_market(pencil.H, tmp_path / "H.mtx")
    A = read_matrix_market(tmp_path / "H.mtx")
    np.testing.assert_array_equal(A.toarray(), pencil.H.toarray())


def test_matrix_market_sparse_roundtrip(tmp_path):
    M = sp.random(50, 50, density=0.05, random_state=0)
    M = (M + M.T + 5 * sp.identity(50)).tocsr()
    write_matrix_market(M, tmp_path / "M.mtx")
    np.testing.assert_array_equal(read_matrix_market(tmp_path / "M.mtx").toarray(), M.toarray())


def _write(path, text):
    path.write_text(text)
    return path


def test_matrix_market_general_and_comments(tmp_path):
    p = _write(tmp_path / "a.mtx", "%%MatrixMarket matrix coordinate real general\n% c\n"
                                   "2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 2\n")
    np.testing.assert_array_equal(read_matrix_market(p).toarray(), [[2, -1], [-1, 2]])


@pytest.mark.parametrize("text", [
    "%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n",  # not square
    "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n",  # short
    "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n",  # out of range
    "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1 1\n",  # field
    "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n",  # array matrix
    "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 3\n",  # conflict
    "%%MatrixMarket matrix coordinate real hermitian\n1 1 1\n1 1 1\n",
    "not a header\n",
])
def test_matrix_market_errors(tmp_path, text):
    with pytest.raises(MatrixMarketError):
        read_matrix_market(_write(tmp_path / "bad.mtx", text))


def test_matrix_market_general_non_hermitian(tmp_path):
    p = _write(tmp_path / "g.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n")
    with pytest.raises(ValueError):
        read_matrix_market(p)


@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=20))
def test_vector_roundtrip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("v") / "x.vec"
    x = np.array(vals)
    write_vector(x, path)
    np.testing.assert_array_equal(read_vector(path), x)


def test_plain_text_vectors(tmp_path):
    np.testing.assert_array_equal(read_vector(_write(tmp_path / "a.txt", "1\n2.5\n\n-3\n")),
                                  [1, 2.5, -3])
    np.testing.assert_array_equal(read_vector(_write(tmp_path / "b.txt", "1 2\n3 -4\n")),
                                  [1 + 2j, 3 - 4j])
