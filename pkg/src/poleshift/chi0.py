"""Independent-particle polarizability chi0(i omega) applied to a vector.

For each occupied state i the response u_i solves

    Q (H - (eps_i + i omega)) Q u_i = -Q [psi_i * g]

and chi0[g] = 2 Re sum_i psi_i * u_i.  Energies are shifted so the highest
occupied level is 0, which places every shift in the closed left half plane.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .contour import SpectralBounds, build_contour
from .lanczos import multishift_solve
from .pencil import Pencil, dense_generalized_eig, project_out
from .pole_solver import combine, compute_basis
from .subsolvers import SubSolveConfig

__all__ = ["Chi0Problem", "Chi0Result", "make_chi0_problem", "apply_chi0", "chi0_sum_over_states"]


@dataclass
class Chi0Problem:
    n_occ: int
    energies: np.ndarray  # occupied energies, shifted so energies[-1] == 0, ascending
    psi: np.ndarray  # (n, n_occ), orthonormal columns
    g: np.ndarray
    omegas: np.ndarray
    unocc_bounds: SpectralBounds | None = None  # shifted unoccupied interval
    shift: float = 0.0  # energy subtracted from H

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.omegas = np.atleast_1d(np.asarray(self.omegas))
        if np.iscomplexobj(self.omegas) and np.any(self.omegas.imag):
            raise ValueError("frequencies must be real (they enter as i omega)")
        self.omegas = self.omegas.real.astype(float)
        G = self.psi.conj().T @ self.psi
        if np.max(np.abs(G - np.eye(self.n_occ))) > 1e-8:
            raise ValueError("occupied vectors are not orthonormal")
        if np.any(self.energies > 1e-12):
            raise ValueError("occupied energies must be <= 0 after the shift")


@dataclass
class Chi0Result:
    values: np.ndarray  # (n_omega, n)
    basis_solves: int
    responses: np.ndarray  # (n_omega, n_occ, n) the u_i


def make_chi0_problem(pencil: Pencil, n_occ: int, g, omegas, safety: float = 0.0):
    """Occupied states by dense diagonalization; returns the problem and the shifted pencil.

    The shifted pencil is H - eps_{N_e} I, so occupied levels are <= 0.
    """
    if pencil.S is not None:
        raise ValueError("the chi0 demo works with S = I")
    eig = dense_generalized_eig(pencil)
    lam = eig.lambdas[::-1]  # ascending
    Psi = eig.Psi[:, ::-1]
    shift = lam[n_occ - 1]
    if lam[n_occ] - shift <= 0:
        raise ValueError("no gap between occupied and unoccupied states")
    H = pencil.H.A - shift * (sp.identity(pencil.n, format="csr") if pencil.H.sparse
                              else np.eye(pencil.n))
    shifted = Pencil(H)
    lo, hi = lam[n_occ] - shift, lam[-1] - shift
    bounds = SpectralBounds(lo / (1 + safety), hi * (1 + safety))
    prob = Chi0Problem(n_occ, lam[:n_occ] - shift, Psi[:, :n_occ], np.asarray(g), omegas,
                       bounds, shift)
    return prob, shifted


def _rhs(problem: Chi0Problem, pencil: Pencil, i: int):
    f = -(problem.psi[:, i] * problem.g)
    return project_out(problem.psi, pencil, f)


def apply_chi0(problem: Chi0Problem, pencil: Pencil, method: str = "pole", P: int = 60,
               config: SubSolveConfig | None = None, contour=None, tol: float = 1e-10,
               project_basis_vectors: bool = True) -> Chi0Result:
    """chi0(i omega)[g] for every omega in ``problem.omegas``.

    ``pencil`` is the shifted Hamiltonian (highest occupied level at 0).  In
    pole mode one basis per occupied state serves all frequencies.
    """
    n = pencil.n
    Ne = problem.n_occ
    W = problem.omegas.size
    U = np.zeros((W, Ne, n), dtype=complex)
    solves = 0
    if method == "pole":
        config = config or SubSolveConfig(method="direct")
        if contour is None:
            contour = build_contour(problem.unocc_bounds, P)
        for i in range(Ne):
            f = _rhs(problem, pencil, i)
            basis = compute_basis(pencil, contour, f, config)
            if project_basis_vectors:
                basis.vectors = np.array([project_out(problem.psi, pencil, h) for h in basis.vectors])
            solves += basis.counters.basis_solves
            for w, om in enumerate(problem.omegas):
                U[w, i] = combine(basis, problem.energies[i] + 1j * om)
    elif method == "lanczos":
        for i in range(Ne):
            f = _rhs(problem, pencil, i)
            zs = problem.energies[i] + 1j * problem.omegas
            out = multishift_solve(pencil, f, zs, tol, variant="cg", projection_basis=problem.psi)
            U[:, i] = out.solutions
            solves += 1
    else:
        raise ValueError(f"method must be 'pole' or 'lanczos', got {method!r}")
    vals = 2.0 * np.real(np.einsum("ni,win->wn", problem.psi, U))
    return Chi0Result(vals, solves, U)


def chi0_sum_over_states(pencil: Pencil, problem: Chi0Problem) -> np.ndarray:
    """Adler-Wiser double sum over all occupied/unoccupied pairs (dense oracle)."""
    eig = dense_generalized_eig(pencil)
    lam = eig.lambdas[::-1]
    Psi = eig.Psi[:, ::-1]
    Ne = problem.n_occ
    occ, unocc = Psi[:, :Ne], Psi[:, Ne:]
    eo, eu = lam[:Ne], lam[Ne:]
    out = np.zeros((problem.omegas.size, pencil.n))
    for w, om in enumerate(problem.omegas):
        acc = np.zeros(pencil.n, dtype=complex)
        for i in range(Ne):
            proj = unocc.conj().T @ (occ[:, i] * problem.g)
            acc += occ[:, i] * (unocc @ (proj / (eo[i] - eu + 1j * om)))
        out[w] = 2.0 * acc.real
    return out
