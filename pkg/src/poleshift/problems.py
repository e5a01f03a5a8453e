"""Test problem generators: grid Hamiltonians and synthetic pencils."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .pencil import EigenDecomposition, IndefiniteSplit, Pencil
from .subsolvers import GridSpec, laplacian_shift_preconditioner

__all__ = [
    "GridHamiltonian",
    "HamiltonianSpec",
    "gen_grid_hamiltonian",
    "gen_random_pencil",
    "laplacian_1d",
]


@dataclass
class HamiltonianSpec:
    """JSON-serializable description of a grid Hamiltonian.

    ``potential`` is ``"zero"``, ``"gaussian"`` or a path to a text file of
    grid values.  Gaussian wells without explicit centers are placed from
    ``seed``.
    """

    dim: int = 1
    points: int = 64
    length: float = 10.0
    potential: str = "zero"
    centers: list | None = None
    depths: list = field(default_factory=lambda: [-5.0])
    width: float = 0.5
    offset: float = 0.0
    seed: int = 0

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianSpec":
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


@dataclass
class GridHamiltonian:
    spec: HamiltonianSpec
    grid: GridSpec
    V: np.ndarray  # flattened potential values
    pencil: Pencil

    @property
    def n(self) -> int:
        return self.grid.size

    def preconditioner(self, xi):
        return laplacian_shift_preconditioner(self.grid, xi)


def laplacian_1d(n: int, h: float) -> sp.csr_matrix:
    """Periodic second-order -1/2 d^2/dx^2."""
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i - 1) % n, (i + 1) % n])
    vals = np.concatenate([np.full(n, 1.0), np.full(2 * n, -0.5)]) / h**2
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _potential(spec: HamiltonianSpec, grid: GridSpec) -> np.ndarray:
    axes = [np.arange(s) * (L / s) for s, L in zip(grid.shape, grid.lengths)]
    mesh = np.meshgrid(*axes, indexing="ij")
    if spec.potential == "zero":
        V = np.zeros(grid.shape)
    elif spec.potential == "gaussian":
        rng = np.random.default_rng(spec.seed)
        depths = list(spec.depths)
        if spec.centers is None:
            centers = [tuple(rng.uniform(0, L) for L in grid.lengths) for _ in depths]
        else:
            centers = [tuple(np.atleast_1d(c)) for c in spec.centers]
        if len(centers) != len(depths):
            raise ValueError("need one depth per well center")
        V = np.zeros(grid.shape)
        for c, d in zip(centers, depths):
            r2 = np.zeros(grid.shape)
            for x, cx, L in zip(mesh, c, grid.lengths):
                dx = np.abs(x - cx)
                dx = np.minimum(dx, L - dx)  # periodic distance
                r2 = r2 + dx**2
            V = V + d * np.exp(-r2 / (2 * spec.width**2))
    else:
        V = np.loadtxt(spec.potential, dtype=float).reshape(grid.shape)
    return (V + spec.offset).reshape(-1)


def gen_grid_hamiltonian(spec: HamiltonianSpec | None = None, **kw) -> GridHamiltonian:
    """Assemble -1/2 Delta_h + V on a periodic 1-D or 2-D grid (S = I)."""
    spec = spec or HamiltonianSpec(**kw)
    if spec.points <= 0:
        raise ValueError("grid size must be positive")
    if spec.dim not in (1, 2):
        raise ValueError("only 1-D and 2-D grids are supported")
    grid = GridSpec((spec.points,) * spec.dim, (spec.length,) * spec.dim)
    h = spec.length / spec.points
    L1 = laplacian_1d(spec.points, h)
    if spec.dim == 1:
        L = L1
    else:
        I = sp.identity(spec.points, format="csr")
        L = (sp.kron(L1, I) + sp.kron(I, L1)).tocsr()
    V = _potential(spec, grid)
    H = (L + sp.diags(V)).tocsr()
    return GridHamiltonian(spec, grid, V, Pencil(H))


def gen_random_pencil(n: int, n_negative: int = 0, condition: float = 100.0, seed: int = 0,
                      lambdas=None, s_condition: float = 4.0, complex_valued: bool = False,
                      identity_S: bool = False):
    """Pencil with a known generalized eigendecomposition.

    Positive eigenvalues are log-spaced in ``[1, condition]``, negative ones
    in ``[-condition, -1]`` unless ``lambdas`` is given.  With S = R* R and a
    unitary Q, Psi = R^{-1} Q is S-orthonormal and H = R* Q Lambda Q* R.

    Returns ``(pencil, eig, split)`` where ``split`` is ``None`` when every
    eigenvalue is positive.
    """
    if n_negative >= n:
        raise ValueError("n_negative must be smaller than n")
    rng = np.random.default_rng(seed)
    if lambdas is None:
        pos = np.geomspace(1.0, condition, n - n_negative)
        neg = -np.geomspace(1.0, condition, n_negative) if n_negative else np.zeros(0)
        lam = np.concatenate([pos, neg])
    else:
        lam = np.asarray(lambdas, dtype=float)
        if lam.size != n:
            raise ValueError("lambdas must have length n")
    lam = np.sort(lam)[::-1]

    def rand(shape):
        X = rng.standard_normal(shape)
        return X + 1j * rng.standard_normal(shape) if complex_valued else X

    Q, _ = np.linalg.qr(rand((n, n)))
    if identity_S:
        R = np.eye(n)
        S = None
    else:
        # S with eigenvalues spread over [1, s_condition]
        U, _ = np.linalg.qr(rand((n, n)))
        s = np.geomspace(1.0, s_condition, n)
        S = (U * s) @ U.conj().T
        S = 0.5 * (S + S.conj().T)
        R = np.linalg.cholesky(S).conj().T
    H = R.conj().T @ (Q * lam) @ Q.conj().T @ R
    H = 0.5 * (H + H.conj().T)
    Psi = np.linalg.solve(R, Q)
    pencil = Pencil(H, S)
    eig = EigenDecomposition(lam, Psi)
    split = eig.split() if n_negative else None
    return pencil, eig, split
