"""Pole-expansion solver for (H - z S) u = b over many shifts.

The P fixed-pole systems (H - xi_k S) h_k = b are solved once; every shift is
then a weighted sum of the stored h_k, costing O(P n) per shift.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contour import PoleContour, SpectralBounds, build_contour
from .pencil import IndefiniteSplit, Pencil, estimate_spectral_bounds, project_out, s_norm, s_orthonormalize
from .subsolvers import ShiftedOperator, SubSolveConfig, direct_factor, iterative_solve

__all__ = [
    "Counters",
    "PoleBasis",
    "SolveReport",
    "default_contour",
    "compute_basis",
    "combine",
    "solve_many",
    "solve_multi_rhs",
    "solve_indefinite",
    "LeakageError",
]

LEAKAGE_TOL = 1e-8


class LeakageError(ValueError):
    """Right-hand side has a component in the excluded (negative) eigenspace."""


@dataclass
class Counters:
    """Work counters.  Vector ops are counted in scalar multiply-adds."""

    basis_solves: int = 0
    factorizations: int = 0
    subsolve_iterations: int = 0
    combine_calls: int = 0
    combine_ops: int = 0


@dataclass(eq=False)
class PoleBasis:
    contour: PoleContour
    vectors: np.ndarray  # (n_stored, n): upper-half solutions, or all P
    residual_norms: np.ndarray  # relative residual per stored pole
    conjugate_shortcut: bool
    solver_used: str
    rhs_tag: str | None = None
    converged: np.ndarray | None = None
    counters: Counters = field(default_factory=Counters)

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def flagged(self) -> bool:
        return self.converged is not None and not bool(np.all(self.converged))

    def stored_nodes(self):
        c = self.contour
        return (c.upper_nodes, c.upper_weights) if self.conjugate_shortcut else (c.nodes, c.weights)

    def full_vectors(self) -> np.ndarray:
        """All P solutions, reconstructing the lower half by conjugation if needed."""
        if self.conjugate_shortcut:
            return np.concatenate([self.vectors, self.vectors.conj()])
        return self.vectors

    def save(self, path) -> None:
        """Bundle as ``.npz``: contour JSON plus vectors and residuals."""
        np.savez(path, contour=json.dumps(self.contour.to_dict()), vectors=self.vectors,
                 residual_norms=self.residual_norms,
                 converged=self.converged if self.converged is not None else np.ones(0, bool),
                 conjugate_shortcut=self.conjugate_shortcut, solver_used=self.solver_used,
                 rhs_tag="" if self.rhs_tag is None else self.rhs_tag)

    @classmethod
    def load(cls, path) -> "PoleBasis":
        with np.load(path, allow_pickle=False) as d:
            conv = d["converged"]
            return cls(PoleContour.from_dict(json.loads(str(d["contour"]))), d["vectors"],
                       d["residual_norms"], bool(d["conjugate_shortcut"]), str(d["solver_used"]),
                       str(d["rhs_tag"]) or None, conv if conv.size else None)


@dataclass
class SolveReport:
    shift_residuals: np.ndarray
    pole_residuals: np.ndarray
    P: int
    timing: dict
    flagged: bool = False
    counters: Counters | None = None

    @property
    def worst_residual(self) -> float:
        return float(np.max(self.shift_residuals)) if self.shift_residuals.size else 0.0


def default_contour(pencil: Pencil, P: int = 60, **bound_kw) -> PoleContour:
    return build_contour(estimate_spectral_bounds(pencil, **bound_kw), P)


def _solve_pole(pencil, xi, b, config, factor=None):
    """One pole system; returns (h, iterations, converged)."""
    if config.method == "direct":
        F = factor if factor is not None else direct_factor(pencil, xi)
        return F.solve(b), 0, True
    if config.method == "minres":
        op = ShiftedOperator(pencil.transformed_apply, xi)
        res = iterative_solve(op, pencil.to_transformed(b), config)
        return pencil.from_transformed(res.x), res.iters, res.converged
    M = config.preconditioner(xi) if config.preconditioner is not None else None
    res = iterative_solve(lambda x: pencil.apply_shifted(xi, x), b, config, preconditioner=M)
    return res.x, res.iters, res.converged


def _pole_jobs(pencil, contour, b):
    """Which poles to solve, and how to produce the lower half for real pencils."""
    real_pencil = pencil.is_real
    real_b = not np.iscomplexobj(b) or not np.any(np.imag(b))
    shortcut = real_pencil and real_b
    return shortcut, real_pencil


def compute_basis(pencil: Pencil, contour: PoleContour, b, config: SubSolveConfig | None = None,
                  workers: int = 1, rhs_tag: str | None = None, factors=None) -> PoleBasis:
    """Solve the fixed-pole systems for right-hand side ``b``.

    For a real pencil and real ``b`` only the P/2 upper-contour systems are
    solved.  With a real pencil and complex ``b`` the lower-contour solutions
    reuse the upper factorizations through conjugation.  ``factors`` may hold
    precomputed direct factorizations of the upper poles.
    """
    config = config or SubSolveConfig()
    b = np.asarray(b)
    shortcut, real_pencil = _pole_jobs(pencil, contour, b)
    half = contour.half
    counters = Counters()
    nb = np.linalg.norm(b)

    if shortcut:
        jobs = [(j, b, False) for j in range(half)]
    elif real_pencil and config.method == "direct":
        bc = np.conj(b)
        jobs = [(j, b, False) for j in range(half)] + [(j, bc, True) for j in range(half)]
    else:
        jobs = [(j, b, False) for j in range(contour.P)]

    own_factors = {}
    if config.method == "direct":
        need = sorted({j for j, _, _ in jobs})
        if factors is None:
            for j in need:
                own_factors[j] = direct_factor(pencil, contour.nodes[j])
                counters.factorizations += 1
        else:
            own_factors = factors

    def run(job):
        j, rhs, conj_back = job
        h, its, ok = _solve_pole(pencil, contour.nodes[j], rhs, config, own_factors.get(j))
        return (np.conj(h) if conj_back else h), its, ok

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    vectors = np.array([r[0] for r in results], dtype=complex)
    nodes = contour.upper_nodes if shortcut else contour.nodes
    resid = np.array([np.linalg.norm(b - pencil.apply_shifted(xi, h)) / nb if nb > 0 else 0.0
                      for xi, h in zip(nodes, vectors)])
    converged = np.array([r[2] for r in results], dtype=bool)
    counters.basis_solves = len(jobs)
    counters.subsolve_iterations = int(sum(r[1] for r in results))
    return PoleBasis(contour, vectors, resid, shortcut, config.method, rhs_tag,
                     converged, counters)


def combine(basis: PoleBasis, z: complex) -> np.ndarray:
    """u^P(z) = sum_k w_k / (xi_k - z) h_k."""
    z = complex(z)
    if z.real > 0:
        raise ValueError(f"shift {z} has Re z > 0, outside the expansion's region")
    nodes, weights = basis.stored_nodes()
    coef = weights / (nodes - z)
    u = coef @ basis.vectors
    if basis.conjugate_shortcut:
        cc = np.conj(weights) / (np.conj(nodes) - z)
        u = u + cc @ basis.vectors.conj()
    basis.counters.combine_calls += 1
    basis.counters.combine_ops += basis.contour.P * basis.n
    return u


def _report(pencil, b, shifts, sols, basis, t_basis, t_comb):
    nb = np.linalg.norm(b)
    res = np.array([np.linalg.norm(b - pencil.apply_shifted(z, u)) / nb if nb > 0 else 0.0
                    for z, u in zip(shifts, sols)])
    return SolveReport(res, basis.residual_norms, basis.contour.P,
                       {"basis": t_basis, "combine": t_comb}, basis.flagged, basis.counters)


def solve_many(pencil: Pencil, contour: PoleContour | None, b, shifts,
               config: SubSolveConfig | None = None, workers: int = 1, P: int = 60,
               return_basis: bool = False):
    """Solutions for every shift from one pole basis.

    Returns ``(solutions, report)``, plus the basis when ``return_basis``.
    """
    if contour is None:
        contour = default_contour(pencil, P)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    t0 = time.perf_counter()
    basis = compute_basis(pencil, contour, b, config, workers)
    t1 = time.perf_counter()
    sols = np.array([combine(basis, z) for z in shifts])
    t2 = time.perf_counter()
    report = _report(pencil, np.asarray(b), shifts, sols, basis, t1 - t0, t2 - t1)
    return (sols, report, basis) if return_basis else (sols, report)


def solve_multi_rhs(pencil: Pencil, contour: PoleContour, rhs_list, shifts,
                    config: SubSolveConfig | None = None, low_memory: bool = False):
    """Direct-method solve for several right-hand sides sharing one set of factorizations.

    Returns ``(solutions, counters)`` with ``solutions[r][l]`` the solution for
    right-hand side ``r`` at shift ``l``.  In ``low_memory`` mode each pole is
    factored, used for every right-hand side, and dropped before the next.
    """
    config = config or SubSolveConfig(method="direct")
    if config.method != "direct":
        raise ValueError("solve_multi_rhs needs the direct method")
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    rhs_list = [np.asarray(b) for b in rhs_list]
    counters = Counters()
    real_pencil = pencil.is_real
    poles = range(contour.half) if real_pencil else range(contour.P)

    if not low_memory:
        factors = {}
        for j in poles:
            factors[j] = direct_factor(pencil, contour.nodes[j])
            counters.factorizations += 1
        bases = [compute_basis(pencil, contour, b, config, factors=factors) for b in rhs_list]
    else:
        # pole-major: per pole, the solution for every rhs (and its conjugate job)
        per_rhs = [dict() for _ in rhs_list]
        for j in poles:
            F = {j: direct_factor(pencil, contour.nodes[j])}
            counters.factorizations += 1
            for r, b in enumerate(rhs_list):
                per_rhs[r][j] = _single_pole_jobs(pencil, contour, b, config, F, j)
            del F
        bases = [_assemble_basis(pencil, contour, b, config, per_rhs[r])
                 for r, b in enumerate(rhs_list)]

    sols = []
    for basis in bases:
        counters.basis_solves += basis.counters.basis_solves
        sols.append(np.array([combine(basis, z) for z in shifts]))
        counters.combine_calls += basis.counters.combine_calls
        counters.combine_ops += basis.counters.combine_ops
    return sols, counters


def _single_pole_jobs(pencil, contour, b, config, F, j):
    """Solutions tied to upper pole ``j`` for rhs ``b``, as compute_basis would produce."""
    shortcut, real_pencil = _pole_jobs(pencil, contour, b)
    h = F[j].solve(b)
    if shortcut:
        return (h,)
    if real_pencil:
        return (h, np.conj(F[j].solve(np.conj(b))))
    return (h,)


def _assemble_basis(pencil, contour, b, config, pieces):
    shortcut, real_pencil = _pole_jobs(pencil, contour, b)
    half = contour.half
    if shortcut:
        vecs = [pieces[j][0] for j in range(half)]
        nodes = contour.upper_nodes
    elif real_pencil:
        vecs = [pieces[j][0] for j in range(half)] + [pieces[j][1] for j in range(half)]
        nodes = contour.nodes
    else:
        vecs = [pieces[j][0] for j in range(contour.P)]
        nodes = contour.nodes
    vectors = np.array(vecs, dtype=complex)
    nb = np.linalg.norm(b)
    resid = np.array([np.linalg.norm(b - pencil.apply_shifted(xi, h)) / nb if nb > 0 else 0.0
                      for xi, h in zip(nodes, vectors)])
    counters = Counters(basis_solves=len(vecs))
    return PoleBasis(contour, vectors, resid, shortcut, "direct", None,
                     np.ones(len(vecs), bool), counters)


def solve_indefinite(pencil: Pencil, split: IndefiniteSplit, b, shifts,
                     config: SubSolveConfig | None = None, project_basis_vectors: bool = False,
                     P: int = 60, contour: PoleContour | None = None, workers: int = 1):
    """Pole solve restricted to the positive generalized eigenspace.

    ``b`` must already be S-orthogonal to ``split.Psi_minus`` (see
    :func:`project_out`).  The contour spans ``[lambda_M, lambda_1]``.
    """
    b = np.asarray(b)
    Y = s_orthonormalize(split.Psi_minus, pencil)
    if Y.shape[1]:
        leak = np.linalg.norm(Y.conj().T @ pencil.apply_S(b))
        if leak > LEAKAGE_TOL * s_norm(pencil, b):
            raise LeakageError(
                f"right-hand side has a negative-eigenspace component ({leak:.2e}); "
                "apply project_out to it first")
    if contour is None:
        contour = build_contour(split.positive_bounds(), P)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    t0 = time.perf_counter()
    basis = compute_basis(pencil, contour, b, config, workers)
    if project_basis_vectors and Y.shape[1]:
        basis.vectors = np.array([project_out(Y, pencil, h) for h in basis.vectors])
    t1 = time.perf_counter()
    sols = np.array([combine(basis, z) for z in shifts])
    t2 = time.perf_counter()
    return sols, _report(pencil, b, shifts, sols, basis, t1 - t0, t2 - t1)
