"""Hermitian pencils (H, S), factorizations and spectral utilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .contour import SpectralBounds

__all__ = [
    "NotPositiveDefiniteError",
    "HermitianOperator",
    "CholeskyFactor",
    "Pencil",
    "EigenDecomposition",
    "IndefiniteSplit",
    "cholesky",
    "dense_generalized_eig",
    "estimate_spectral_bounds",
    "s_norm",
    "s_orthonormalize",
    "project_out",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]

DENSE_EIG_MAX = 2000


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class MatrixMarketError(ValueError):
    pass


class HermitianOperator:
    """Dense or CSR-sparse Hermitian matrix with an ``apply`` method."""

    def __init__(self, A, check: bool = True):
        if sp.issparse(A):
            A = sp.csr_matrix(A)
            A.sum_duplicates()
            self.sparse = True
        else:
            A = np.asarray(A)
            if A.dtype.kind not in "fc":
                A = A.astype(float)
            self.sparse = False
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"operator must be square, got shape {A.shape}")
        self.A = A
        self.n = A.shape[0]
        if check:
            self._check_hermitian()

    def _check_hermitian(self):
        A = self.A
        if self.sparse:
            D = abs(A - A.conj().T)
            dev = D.max() if D.nnz else 0.0
            scale = abs(A).max() if A.nnz else 0.0
        else:
            dev = np.max(np.abs(A - A.conj().T), initial=0.0)
            scale = np.max(np.abs(A), initial=0.0)
        if dev > 1e-12 * scale:
            raise ValueError(f"operator is not Hermitian (max |A - A*| = {dev:.3e})")

    @property
    def dtype(self):
        return self.A.dtype

    @property
    def is_real(self) -> bool:
        if self.A.dtype.kind == "f":
            return True
        data = self.A.data if self.sparse else self.A
        return not np.any(data.imag)

    def apply(self, x):
        return self.A @ x

    __matmul__ = apply

    def toarray(self) -> np.ndarray:
        return self.A.toarray() if self.sparse else np.array(self.A)

    def __repr__(self):
        kind = "sparse" if self.sparse else "dense"
        return f"HermitianOperator(n={self.n}, {kind}, dtype={self.dtype})"


class CholeskyFactor:
    """Upper-triangular R with S = R* R."""

    def __init__(self, R):
        self.R = np.asarray(R)
        self.n = self.R.shape[0]

    def apply(self, x):
        return self.R @ x

    def solve_R(self, x):
        """R^{-1} x."""
        return sla.solve_triangular(self.R, x, lower=False, check_finite=False)

    def solve_RH(self, x):
        """R^{-*} x."""
        return sla.solve_triangular(self.R, x, lower=False, trans="C", check_finite=False)


def _as_operator(A) -> HermitianOperator | None:
    if A is None or isinstance(A, HermitianOperator):
        return A
    return HermitianOperator(A)


def cholesky(S) -> CholeskyFactor:
    """Cholesky factor of a Hermitian positive definite operator.

    Sparse input is densified first (no sparse Cholesky in scipy).
    """
    S = _as_operator(S)
    try:
        R = sla.cholesky(S.toarray(), lower=False, check_finite=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from None
    return CholeskyFactor(R)


class Pencil:
    """The pair (H, S); ``S=None`` stands for the identity."""

    def __init__(self, H, S=None, chol_S: CholeskyFactor | None = None):
        self.H = _as_operator(H)
        self.S = _as_operator(S)
        self.n = self.H.n
        if self.S is not None and self.S.n != self.n:
            raise ValueError("H and S dimensions differ")
        self._chol = chol_S

    @property
    def identity_S(self) -> bool:
        return self.S is None

    @property
    def chol_S(self) -> CholeskyFactor | None:
        if self._chol is None and self.S is not None:
            self._chol = cholesky(self.S)
        return self._chol

    @property
    def is_real(self) -> bool:
        return self.H.is_real and (self.S is None or self.S.is_real)

    @property
    def sparse(self) -> bool:
        return self.H.sparse and (self.S is None or self.S.sparse)

    def apply_H(self, x):
        return self.H.apply(x)

    def apply_S(self, x):
        return x if self.S is None else self.S.apply(x)

    def apply_shifted(self, z, x):
        """(H - z S) x."""
        return self.apply_H(x) - z * self.apply_S(x)

    def shifted_matrix(self, z):
        """Explicit H - z S, sparse CSR if both members are sparse."""
        H = self.H.A
        if self.sparse:
            S = sp.identity(self.n, format="csr") if self.S is None else self.S.A
            return sp.csr_matrix(H - z * S)
        H = self.H.toarray()
        S = np.eye(self.n) if self.S is None else self.S.toarray()
        return H - z * S

    def transformed_apply(self, x):
        """R^{-*} H R^{-1} x (plain H x when S is the identity)."""
        if self.S is None:
            return self.apply_H(x)
        R = self.chol_S
        return R.solve_RH(self.apply_H(R.solve_R(x)))

    def to_transformed(self, b):
        return b if self.S is None else self.chol_S.solve_RH(b)

    def from_transformed(self, u):
        return u if self.S is None else self.chol_S.solve_R(u)

    def residual(self, z, x, b) -> float:
        """||b - (H - zS) x||_2 / ||b||_2."""
        nb = np.linalg.norm(b)
        r = np.linalg.norm(b - self.apply_shifted(z, x))
        return r / nb if nb > 0 else r


@dataclass
class IndefiniteSplit:
    M_pos: int
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    Psi_plus: np.ndarray
    Psi_minus: np.ndarray

    def positive_bounds(self) -> SpectralBounds:
        return SpectralBounds(float(self.lambda_plus.min()), float(self.lambda_plus.max()))


@dataclass
class EigenDecomposition:
    lambdas: np.ndarray  # non-increasing
    Psi: np.ndarray

    def split(self) -> IndefiniteSplit:
        pos = self.lambdas > 0
        M = int(pos.sum())
        if M == 0:
            raise ValueError("pencil has no positive eigenvalues")
        if M < len(self.lambdas) and self.lambdas[M] == 0:
            raise ValueError("pencil has a zero eigenvalue")
        return IndefiniteSplit(M, self.lambdas[:M], self.lambdas[M:],
                               self.Psi[:, :M], self.Psi[:, M:])

    def apply_function(self, f, b):
        """Psi f(Lambda) Psi* b."""
        return self.Psi @ (f(self.lambdas) * (self.Psi.conj().T @ b))


def dense_generalized_eig(pencil: Pencil) -> EigenDecomposition:
    """Test oracle: all generalized eigenpairs, eigenvalues non-increasing."""
    if pencil.n > DENSE_EIG_MAX:
        raise ValueError(f"dense eigensolver is capped at n = {DENSE_EIG_MAX}")
    H = pencil.H.toarray()
    if pencil.S is None:
        lam, Y = np.linalg.eigh(H)
        Psi = Y
    else:
        R = pencil.chol_S
        C = R.solve_RH(R.solve_RH(H).conj().T)  # R^{-*} H R^{-1}
        C = 0.5 * (C + C.conj().T)
        lam, Y = np.linalg.eigh(C)
        Psi = R.solve_R(Y)
    order = np.argsort(lam)[::-1]
    return EigenDecomposition(lam[order], Psi[:, order])


def _lanczos_ritz(apply, v0, iters):
    n = v0.shape[0]
    v = v0 / np.linalg.norm(v0)
    v_prev = np.zeros_like(v)
    beta = 0.0
    alphas, betas = [], []
    for _ in range(min(iters, n)):
        w = apply(v) - beta * v_prev
        alpha = np.real(np.vdot(v, w))
        w = w - alpha * v
        alphas.append(alpha)
        beta = np.linalg.norm(w)
        if beta <= 1e-14 * max(abs(alpha), 1.0):
            break
        betas.append(beta)
        v_prev, v = v, w / beta
    k = len(alphas)
    if k == 1:
        return np.array(alphas)
    return eigh_tridiagonal(np.array(alphas), np.array(betas[: k - 1]), eigvals_only=True)


def estimate_spectral_bounds(pencil: Pencil, iters: int = 50, safety: float = 0.05,
                             seed: int = 0) -> SpectralBounds:
    """Enclosing interval for a positive generalized spectrum from Lanczos Ritz values."""
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(pencil.n)
    if not pencil.is_real:
        v0 = v0 + 1j * rng.standard_normal(pencil.n)
    ritz = _lanczos_ritz(pencil.transformed_apply, v0, iters)
    lo, hi = float(ritz.min()), float(ritz.max())
    if hi <= 0:
        raise ValueError("no positive spectrum detected")
    if lo <= 0:
        raise ValueError("pencil appears indefinite; supply bounds for the positive part explicitly")
    return SpectralBounds(lo / (1.0 + safety), hi * (1.0 + safety))


def s_norm(pencil: Pencil, x) -> float:
    if pencil.S is None:
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(pencil.chol_S.apply(x)))


def s_orthonormalize(basis, pencil: Pencil) -> np.ndarray:
    """Return a basis of the same span with Psi* S Psi = I (no-op if already so)."""
    Y = np.asarray(basis)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] == 0:
        return Y
    G = Y.conj().T @ pencil.apply_S(Y)
    if np.max(np.abs(G - np.eye(G.shape[0]))) <= 1e-12:
        return Y
    L = np.linalg.cholesky(0.5 * (G + G.conj().T))
    return sla.solve_triangular(L, Y.conj().T, lower=True).conj().T


def project_out(basis, pencil: Pencil, x):
    """x - Psi (Psi* S x), applied twice; ``basis`` is S-orthonormalized first."""
    Y = s_orthonormalize(basis, pencil)
    x = np.asarray(x)
    if Y.shape[0] != x.shape[0]:
        raise ValueError(f"dimension mismatch: basis has {Y.shape[0]} rows, vector {x.shape[0]}")
    if Y.shape[1] == 0:
        return x.copy()
    SY = pencil.apply_S(Y)
    for _ in range(2):
        x = x - Y @ (SY.conj().T @ x)
    return x


# -- Matrix Market ---------------------------------------------------------

def _parse_header(line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket" or parts[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed Matrix Market header: {line.strip()!r}")
    fmt, field, symm = (p.lower() for p in parts[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}")
    if field not in ("real", "complex", "integer"):
        raise MatrixMarketError(f"unsupported field {field!r}")
    if symm not in ("general", "symmetric", "hermitian"):
        raise MatrixMarketError(f"unsupported symmetry {symm!r}")
    if symm == "hermitian" and field != "complex":
        raise MatrixMarketError("hermitian symmetry requires a complex field")
    return fmt, field, symm


def _data_lines(fh):
    for line in fh:
        s = line.strip()
        if s and not s.startswith("%"):
            yield s


def read_matrix_market(path) -> HermitianOperator:
    """Read a square Hermitian coordinate-format file into a sparse operator."""
    with open(path) as fh:
        fmt, field, symm = _parse_header(fh.readline())
        if fmt != "coordinate":
            raise MatrixMarketError("matrices must be in coordinate format")
        lines = _data_lines(fh)
        try:
            nr, nc, nnz = (int(t) for t in next(lines).split())
        except (StopIteration, ValueError):
            raise MatrixMarketError("missing or malformed size line") from None
        if nr != nc:
            raise MatrixMarketError(f"matrix is not square ({nr} x {nc})")
        entries = {}
        count = 0
        for s in lines:
            tok = s.split()
            i, j = int(tok[0]) - 1, int(tok[1]) - 1
            if field == "complex":
                v = complex(float(tok[2]), float(tok[3]))
            else:
                v = float(tok[2])
            if not (0 <= i < nr and 0 <= j < nc):
                raise MatrixMarketError(f"entry ({i + 1}, {j + 1}) out of range")
            entries[(i, j)] = entries.get((i, j), 0) + v
            count += 1
        if count != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {count}")

    if symm != "general":
        conj = symm == "hermitian"
        for (i, j), v in list(entries.items()):
            if i == j:
                if conj and v.imag != 0:
                    raise MatrixMarketError(f"hermitian diagonal entry ({i + 1}, {i + 1}) is not real")
                continue
            mirror = np.conj(v) if conj else v
            other = entries.get((j, i))
            if other is None:
                entries[(j, i)] = mirror
            elif other != mirror:
                raise MatrixMarketError(
                    f"{symm} file stores conflicting entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1})")
    rows = np.array([k[0] for k in entries], dtype=int)
    cols = np.array([k[1] for k in entries], dtype=int)
    vals = np.array(list(entries.values()), dtype=complex if field == "complex" else float)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(nr, nr))
    return HermitianOperator(A)


def _fmt(v, complex_field):
    if complex_field:
        return f"{v.real:.17g} {v.imag:.17g}"
    return f"{float(np.real(v)):.17g}"


def write_matrix_market(op, path) -> None:
    """Write the lower triangle of a Hermitian operator in coordinate format."""
    op = _as_operator(op)
    cplx = not op.is_real
    A = sp.coo_matrix(op.A)
    keep = A.row >= A.col
    rows, cols, vals = A.row[keep], A.col[keep], A.data[keep]
    order = np.lexsort((rows, cols))
    symm = "hermitian" if cplx else "symmetric"
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {'complex' if cplx else 'real'} {symm}\n")
        fh.write(f"{op.n} {op.n} {len(order)}\n")
        for k in order:
            fh.write(f"{rows[k] + 1} {cols[k] + 1} {_fmt(vals[k], cplx)}\n")


def read_vector(path) -> np.ndarray:
    """Vector from a Matrix Market array file or whitespace-separated text.

    Plain text holds one value per line, either ``re`` or ``re im``.
    """
    with open(path) as fh:
        first = fh.readline()
        if first.lower().startswith("%%matrixmarket"):
            fmt, field, _ = _parse_header(first)
            if fmt != "array":
                raise MatrixMarketError("vectors must use the array format")
            lines = _data_lines(fh)
            nr, nc = (int(t) for t in next(lines).split())
            if nc != 1:
                raise MatrixMarketError("vector file must have one column")
            vals = [s.split() for s in lines]
        else:
            vals = [s.split() for s in _data_lines([first, *fh])]
            field = "complex" if any(len(v) == 2 for v in vals) else "real"
            nr = len(vals)
    if len(vals) != nr:
        raise MatrixMarketError(f"expected {nr} values, found {len(vals)}")
    if field == "complex":
        return np.array([complex(float(v[0]), float(v[1]) if len(v) > 1 else 0.0) for v in vals])
    return np.array([float(v[0]) for v in vals])


def write_vector(x, path) -> None:
    x = np.asarray(x)
    cplx = np.iscomplexobj(x) and np.any(x.imag)
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix array {'complex' if cplx else 'real'} general\n")
        fh.write(f"{x.size} 1\n")
        for v in x:
            fh.write(_fmt(v, cplx) + "\n")
