"""Solvers for the fixed-pole systems (H - xi S) h = b."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .pencil import Pencil

__all__ = [
    "SubSolveConfig",
    "SingularShiftError",
    "ShiftedFactorization",
    "ShiftedOperator",
    "IterativeResult",
    "GridSpec",
    "direct_factor",
    "iterative_solve",
    "gmres",
    "minres_shifted",
    "laplacian_eigenvalues",
    "laplacian_shift_preconditioner",
]

METHODS = ("direct", "gmres", "minres")


class SingularShiftError(np.linalg.LinAlgError):
    """The shift coincides (numerically) with a generalized eigenvalue."""


@dataclass
class SubSolveConfig:
    tol: float = 1e-7
    max_iter: int = 500
    method: str = "direct"
    restart: int = 0
    # preconditioner factory: xi -> callable approximating (H - xi S)^{-1}
    preconditioner: Optional[Callable] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


class ShiftedFactorization:
    """Complex LU of H - xi S, reusable across right-hand sides."""

    def __init__(self, xi: complex, matrix):
        self.xi = complex(xi)
        self.n = matrix.shape[0]
        self.sparse = sp.issparse(matrix)
        if self.sparse:
            try:
                self._lu = spla.splu(sp.csc_matrix(matrix, dtype=complex), permc_spec="COLAMD")
            except RuntimeError as exc:
                raise SingularShiftError(f"shift {xi} coincides with spectrum: {exc}") from None
            diag = np.abs(self._lu.U.diagonal())
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                self._lu = sla.lu_factor(np.asarray(matrix, dtype=complex), check_finite=False)
            diag = np.abs(np.diag(self._lu[0]))
        if diag.size and diag.min() <= self.n * np.finfo(float).eps * diag.max():
            raise SingularShiftError(f"shift {xi} coincides with spectrum (zero pivot)")

    def solve(self, b):
        b = np.asarray(b, dtype=complex)
        if self.sparse:
            return self._lu.solve(b)
        return sla.lu_solve(self._lu, b, check_finite=False)


def direct_factor(pencil: Pencil, xi: complex) -> ShiftedFactorization:
    return ShiftedFactorization(xi, pencil.shifted_matrix(xi))


@dataclass
class ShiftedOperator:
    """x -> (A - shift I) x for a Hermitian ``A`` given by its apply function.

    The symmetric iterative method needs this structure; the general method
    just calls it.
    """

    apply_A: Callable
    shift: complex

    def __call__(self, x):
        return self.apply_A(x) - self.shift * x


@dataclass
class IterativeResult:
    x: np.ndarray
    iters: int
    residual: float
    converged: bool


def _trace(trace, **rec):
    if trace is not None:
        trace.write(json.dumps(rec) + "\n")


def gmres(apply, b, tol=1e-7, max_iter=500, restart=0, M=None, trace=None) -> IterativeResult:
    """Right-preconditioned GMRES, modified Gram-Schmidt with one reorthogonalization pass.

    ``restart=0`` means no restart (Krylov dimension up to ``max_iter``).
    """
    b = np.asarray(b, dtype=complex)
    n = b.shape[0]
    nb = np.linalg.norm(b)
    x = np.zeros(n, dtype=complex)
    if nb == 0:
        return IterativeResult(x, 0, 0.0, True)
    prec = M if M is not None else (lambda v: v)
    m_cycle = restart if restart > 0 else max_iter
    total = 0
    r = b.copy()
    beta = nb
    while True:
        m = min(m_cycle, max_iter - total)
        V = np.zeros((n, m + 1), dtype=complex)
        Z = np.zeros((n, m), dtype=complex)
        Hh = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        V[:, 0] = r / beta
        j_done = 0
        res = beta / nb
        for j in range(m):
            Z[:, j] = prec(V[:, j])
            w = apply(Z[:, j])
            for _ in range(2):
                for i in range(j + 1):
                    h = np.vdot(V[:, i], w)
                    Hh[i, j] += h
                    w = w - h * V[:, i]
            hn = np.linalg.norm(w)
            Hh[j + 1, j] = hn
            for i in range(j):
                t = cs[i] * Hh[i, j] + sn[i] * Hh[i + 1, j]
                Hh[i + 1, j] = -np.conj(sn[i]) * Hh[i, j] + cs[i] * Hh[i + 1, j]
                Hh[i, j] = t
            c, s, rr = _givens(Hh[j, j], Hh[j + 1, j])
            cs[j], sn[j] = c, s
            Hh[j, j], Hh[j + 1, j] = rr, 0.0
            g[j + 1] = -np.conj(s) * g[j]
            g[j] = c * g[j]
            j_done = j + 1
            total += 1
            res = abs(g[j + 1]) / nb
            _trace(trace, k=total, residual=res)
            if res <= tol or hn <= 1e-14 * nb:
                break
            V[:, j + 1] = w / hn
        y = sla.solve_triangular(Hh[:j_done, :j_done], g[:j_done], lower=False, check_finite=False)
        x = x + Z[:, :j_done] @ y
        r = b - apply(x)
        beta = np.linalg.norm(r)
        res = beta / nb
        if res <= tol or total >= max_iter:
            return IterativeResult(x, total, res, res <= tol)
        if restart <= 0:
            # breakdown without convergence
            return IterativeResult(x, total, res, False)


def _givens(a: complex, b: complex):
    """c real, s complex with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    aa, ab = abs(a), abs(b)
    if ab == 0:
        return 1.0, 0.0, a
    if aa == 0:
        return 0.0, np.conj(b) / ab, ab
    rho = np.hypot(aa, ab)
    phase = a / aa
    return aa / rho, phase * np.conj(b) / rho, phase * rho


def minres_shifted(op: ShiftedOperator, b, tol=1e-7, max_iter=500, trace=None) -> IterativeResult:
    """MINRES for (A - sigma I) x = b with Hermitian A and complex sigma."""
    from .lanczos import multishift_solve_transformed

    out = multishift_solve_transformed(op.apply_A, np.asarray(b), [op.shift], [tol],
                                       variant="minres", max_iter=max_iter, trace=trace)
    x = out.solutions[0]
    nb = np.linalg.norm(b)
    res = np.linalg.norm(b - op(x)) / nb if nb > 0 else 0.0
    return IterativeResult(x, out.iterations, res, res <= tol)


def iterative_solve(op, b, config: SubSolveConfig, preconditioner=None, trace=None) -> IterativeResult:
    """Iterative solve of ``op(h) = b`` per ``config.method``.

    A convergence failure is returned with ``converged=False``, never raised.
    """
    if config.method == "gmres":
        return gmres(op, b, config.tol, config.max_iter, config.restart, preconditioner, trace)
    if config.method == "minres":
        if not isinstance(op, ShiftedOperator):
            raise TypeError("the symmetric method needs a ShiftedOperator (Hermitian apply + shift)")
        if preconditioner is not None:
            raise ValueError("the symmetric method does not take a preconditioner")
        return minres_shifted(op, b, config.tol, config.max_iter, trace)
    raise ValueError(f"{config.method!r} is not an iterative method")


@dataclass(frozen=True)
class GridSpec:
    """Periodic uniform grid: ``shape`` points over box side lengths ``lengths``."""

    shape: tuple
    lengths: tuple

    def __post_init__(self):
        if len(self.shape) != len(self.lengths) or any(s <= 0 for s in self.shape):
            raise ValueError("grid shape must be positive and match lengths")

    @property
    def spacing(self):
        return tuple(L / s for L, s in zip(self.lengths, self.shape))

    @property
    def size(self):
        return int(np.prod(self.shape))


def laplacian_eigenvalues(grid: GridSpec) -> np.ndarray:
    """Eigenvalues of -1/2 Delta_h (second-order, periodic) in FFT ordering."""
    mu = np.zeros(grid.shape)
    for axis, (npts, h) in enumerate(zip(grid.shape, grid.spacing)):
        theta = 2 * np.pi * np.arange(npts) / npts
        m1 = (1.0 - np.cos(theta)) / h**2
        sh = [1] * len(grid.shape)
        sh[axis] = npts
        mu = mu + m1.reshape(sh)
    return mu


def laplacian_shift_preconditioner(grid: GridSpec, xi: complex):
    """Exact ``(-1/2 Delta_h - xi)^{-1}`` by FFT diagonalization.

    This is the inverse of ``H - xi`` with the potential dropped.
    """
    denom = laplacian_eigenvalues(grid) - xi
    if np.any(denom == 0):
        raise SingularShiftError(f"shift {xi} hits a Laplacian eigenvalue")
    inv = 1.0 / denom

    def apply(x):
        X = np.fft.fftn(np.reshape(x, grid.shape))
        return np.fft.ifftn(X * inv).reshape(-1)

    return apply
