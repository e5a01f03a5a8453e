"""Multi-shift Lanczos: one Krylov recurrence, one small tridiagonal solve per shift.

For S != I the pencil is first reduced to A = R^{-*} H R^{-1} with
b~ = R^{-*} b; solutions are mapped back with u = R^{-1} u~.  The Lanczos
vectors are never stored (three-term recurrence); each shift carries one
search direction (CG style) or two (MINRES style) plus its iterate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pencil import Pencil, s_orthonormalize
from .subsolvers import _givens

__all__ = [
    "LanczosState",
    "ShiftSet",
    "CGTracker",
    "MinresTracker",
    "MultiShiftResult",
    "multishift_solve",
    "multishift_solve_transformed",
]

DRIFT_CHECK_EVERY = 25
BREAKDOWN_TOL = 1e-14


class ShiftSet:
    def __init__(self, shifts):
        self.shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))

    def __len__(self):
        return self.shifts.size

    def __iter__(self):
        return iter(self.shifts)

    def __getitem__(self, i):
        return self.shifts[i]

    @property
    def n_z(self) -> int:
        return self.shifts.size

    def left_half_plane(self) -> bool:
        return bool(np.all(self.shifts.real <= 0))


@dataclass
class LanczosState:
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)  # betas[j] couples v_j and v_{j+1}
    v_prev: np.ndarray | None = None
    v_curr: np.ndarray | None = None
    k: int = 0


class CGTracker:
    """LDL^T (no pivoting) of T_k - sigma I, updated one column at a time."""

    n_dirs = 1

    def __init__(self, sigma, beta1, n, dtype):
        self.sigma = sigma
        self.beta1 = beta1
        self.x = np.zeros(n, dtype=dtype)
        self.p = None
        self.eta = None
        self.zeta = None
        self.residual = beta1
        self.converged = False

    def update(self, v, alpha, beta_in, beta_out):
        if self.p is None:
            self.eta = alpha - self.sigma
            self.zeta = self.beta1
            self.p = v / self.eta
        else:
            lam = beta_in / self.eta
            self.eta = alpha - self.sigma - lam * beta_in
            self.zeta = -lam * self.zeta
            self.p = (v - beta_in * self.p) / self.eta
        self.x += self.zeta * self.p
        self.residual = beta_out * abs(self.zeta / self.eta)


class MinresTracker:
    """QR of the (k+1) x k shifted tridiagonal by complex Givens rotations."""

    n_dirs = 2

    def __init__(self, sigma, beta1, n, dtype):
        self.sigma = sigma
        self.x = np.zeros(n, dtype=dtype)
        self.w1 = np.zeros(n, dtype=dtype)  # w_{k-1}
        self.w2 = np.zeros(n, dtype=dtype)  # w_{k-2}
        self.c1, self.s1 = 1.0, 0.0
        self.c2, self.s2 = 1.0, 0.0
        self.phibar = complex(beta1)
        self.residual = beta1
        self.converged = False

    def update(self, v, alpha, beta_in, beta_out):
        eps = self.s2 * beta_in
        dlt = self.c2 * beta_in
        a = alpha - self.sigma
        delta = self.c1 * dlt + self.s1 * a
        gbar = -np.conj(self.s1) * dlt + self.c1 * a
        c, s, gamma = _givens(gbar, beta_out)
        w = (v - delta * self.w1 - eps * self.w2) / gamma
        tau = c * self.phibar
        self.phibar = -np.conj(s) * self.phibar
        self.x += tau * w
        self.w2, self.w1 = self.w1, w
        self.c2, self.s2, self.c1, self.s1 = self.c1, self.s1, c, s
        self.residual = abs(self.phibar)


_TRACKERS = {"cg": CGTracker, "minres": MinresTracker}


@dataclass
class MultiShiftResult:
    solutions: np.ndarray  # (N_z, n)
    iterations: int
    residuals: np.ndarray  # true relative residuals
    estimates: np.ndarray  # recurrence estimates (relative)
    converged: np.ndarray
    breakdown: bool
    vector_ops: int
    iterations_per_shift: np.ndarray
    max_drift: float = 0.0


def multishift_solve_transformed(apply_A, b, shifts, tols, variant="cg", project=None,
                                 max_iter=None, true_residual=None, full_reorth=False,
                                 trace=None) -> MultiShiftResult:
    """Core recurrence on (A - sigma_l I) x_l = b for Hermitian ``A``.

    ``true_residual(l, x)``, if given, is the acceptance test for shift ``l``
    (e.g. the residual in original variables); a shift whose recurrence
    estimate passes but whose true residual does not keeps iterating with a
    tightened internal target.
    """
    b = np.asarray(b)
    n = b.shape[0]
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    tols = np.broadcast_to(np.asarray(tols, dtype=float), shifts.shape).copy()
    if variant not in _TRACKERS:
        raise ValueError(f"variant must be 'cg' or 'minres', got {variant!r}")
    if variant == "cg" and np.any(shifts.real > 0):
        raise ValueError("CG-style variant needs Re z <= 0; use variant='minres'")
    max_iter = 10 * n if max_iter is None else max_iter
    dtype = complex

    v = b.astype(complex)
    if project is not None:
        v = project(v)
    beta1 = np.linalg.norm(v)
    N = shifts.size
    sols = np.zeros((N, n), dtype=dtype)
    if beta1 == 0:
        return MultiShiftResult(sols, 0, np.zeros(N), np.zeros(N), np.ones(N, bool), False, 0,
                                np.zeros(N, int))
    rhs = v
    v = v / beta1
    trackers = [_TRACKERS[variant](s, beta1, n, dtype) for s in shifts]
    targets = tols.copy()
    iters_per_shift = np.zeros(N, dtype=int)
    state = LanczosState(v_prev=np.zeros(n, dtype=dtype), v_curr=v)
    basis = [v] if full_reorth else None
    beta = 0.0
    ops = 0
    breakdown = False
    max_drift = 0.0
    active = list(range(N))

    for k in range(1, max_iter + 1):
        w = apply_A(state.v_curr)
        ops += 1
        w = w - beta * state.v_prev
        alpha = float(np.real(np.vdot(state.v_curr, w)))
        w = w - alpha * state.v_curr
        ops += 3
        if basis is not None:
            Vb = np.array(basis).T
            w = w - Vb @ (Vb.conj().T @ w)
            ops += 2 * len(basis)
        if project is not None:
            w = project(w)
        beta_next = float(np.linalg.norm(w))
        ops += 1
        state.alphas.append(alpha)
        state.betas.append(beta_next)
        state.k = k

        for l in active:
            trackers[l].update(state.v_curr, alpha, beta, beta_next)
            iters_per_shift[l] = k
            ops += 2 * trackers[l].n_dirs
            if trace is not None:
                trace.write(json.dumps({"k": k, "shift_index": l,
                                        "residual": trackers[l].residual / beta1}) + "\n")

        if k % DRIFT_CHECK_EVERY == 0:
            for l in active:
                tr = trackers[l]
                true = np.linalg.norm(rhs - (apply_A(tr.x) - tr.sigma * tr.x))
                ops += 3
                drift = abs(true - tr.residual) / beta1
                max_drift = max(max_drift, drift)
                tr.residual = max(tr.residual, true)

        still = []
        for l in active:
            tr = trackers[l]
            if tr.residual / beta1 <= targets[l]:
                ok = True
                if true_residual is not None:
                    r = true_residual(l, tr.x)
                    ops += 3
                    if r > tols[l]:
                        ok = False
                        targets[l] = min(targets[l], tr.residual / beta1) * 0.5 * tols[l] / r
                if ok:
                    tr.converged = True
                    continue
            still.append(l)
        active = still

        lucky = beta_next < BREAKDOWN_TOL * beta1
        if not active or lucky:
            breakdown = lucky and bool(active)
            break
        state.v_prev, state.v_curr = state.v_curr, w / beta_next
        if basis is not None:
            basis.append(state.v_curr)
        beta = beta_next

    for l, tr in enumerate(trackers):
        sols[l] = tr.x
    est = np.array([tr.residual / beta1 for tr in trackers])
    conv = np.array([tr.converged for tr in trackers])
    return MultiShiftResult(sols, state.k, est.copy(), est, conv, breakdown, ops,
                            iters_per_shift, max_drift)


def multishift_solve(pencil: Pencil, b, shifts, tol_per_shift=1e-8, variant="cg",
                     projection_basis=None, max_iter=None, full_reorth=False,
                     trace=None) -> MultiShiftResult:
    """Solve (H - z_l S) x_l = b for every shift from a single Lanczos recurrence.

    Convergence per shift means ``||b - (H - z_l S) x_l|| / ||b|| <= tol_l``
    in the original variables.  ``projection_basis`` (columns spanning the
    negative generalized eigenspace) is projected out of every Lanczos vector.
    """
    shifts = ShiftSet(shifts).shifts
    b = np.asarray(b)

    project = None
    if projection_basis is not None and np.asarray(projection_basis).size:
        Y = s_orthonormalize(projection_basis, pencil)
        Yt = Y if pencil.identity_S else pencil.chol_S.apply(Y)
        SY = pencil.apply_S(Y)

        def project(x):
            for _ in range(2):
                x = x - Yt @ (Yt.conj().T @ x)
            return x

        # the right-hand side actually solved for: b with its S Psi_- part removed
        for _ in range(2):
            b = b - SY @ (Y.conj().T @ b)
    nb = np.linalg.norm(b)
    bt = pencil.to_transformed(b.astype(complex))

    def true_residual(l, xt):
        x = pencil.from_transformed(xt)
        return np.linalg.norm(b - pencil.apply_shifted(shifts[l], x)) / nb

    tols = np.broadcast_to(np.asarray(tol_per_shift, dtype=float), shifts.shape)
    out = multishift_solve_transformed(pencil.transformed_apply, bt, shifts, tols, variant,
                                       project, max_iter, true_residual if nb > 0 else None,
                                       full_reorth, trace)
    sols = np.array([pencil.from_transformed(x) for x in out.solutions])
    if nb > 0:
        res = np.array([np.linalg.norm(b - pencil.apply_shifted(z, x)) / nb
                        for z, x in zip(shifts, sols)])
    else:
        res = np.zeros(shifts.size)
    out.solutions = sols
    out.residuals = res
    out.converged = res <= tols
    return out
