"""Desk-scale experiments: scalar accuracy figures and solver benchmarks.

Every experiment writes ``<name>.csv`` and ``<name>.json`` (summary) into an
output directory and returns the summary dict.

CSV schemas (fixed):

* ``pole_decay.csv``   P, error
* ``numpoles.csv``     sigma, log10_condition, P
* ``z_sweep.csv``      re_z, im_z, error
* ``compare.csv``      eta, pole_residual, lanczos_residual
* ``multi_rhs.csv``    rhs_index, worst_residual, max_diff_vs_fresh
"""
from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import numpy as np

from .contour import SpectralBounds, build_contour, required_poles, scalar_error_sup, scalar_error_sup_many
from .lanczos import multishift_solve
from .pencil import Pencil, dense_generalized_eig, project_out
from .pole_solver import combine, compute_basis, solve_indefinite, solve_many, solve_multi_rhs
from .problems import gen_grid_hamiltonian
from .subsolvers import SubSolveConfig

__all__ = [
    "linear_fit",
    "fig_pole_decay",
    "fig_numpoles",
    "fig_z_sweep",
    "bench_compare",
    "bench_multi_rhs",
    "bench_scaling",
]

ERROR_FLOOR = 1e-13


def linear_fit(x, y):
    """Least-squares line; returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _write(out_dir, name, header, rows, summary):
    if out_dir is None:
        return summary
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    with open(out / f"{name}.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def fig_pole_decay(out_dir=None, m=1.0, M=1000.0, z=1j, Ps=range(10, 90, 10), n_samples=10000):
    """Scalar sup error versus pole count."""
    bounds = SpectralBounds(m, M)
    Ps = list(Ps)
    errs = [scalar_error_sup(build_contour(bounds, P), (m, M), z, n_samples) for P in Ps]
    above = [i for i, e in enumerate(errs) if e > 10 * ERROR_FLOOR]
    slope, _, r2 = linear_fit([Ps[i] for i in above], np.log10([errs[i] for i in above]))
    decreasing = all(errs[i + 1] < errs[i] for i in range(len(above) - 1 if above else 0))
    summary = {"P": Ps, "error": errs, "slope_log10_per_pole": slope, "r_squared": r2,
               "strictly_decreasing_above_floor": bool(decreasing)}
    return _write(out_dir, "pole_decay", ["P", "error"], zip(Ps, errs), summary)


def fig_numpoles(out_dir=None, sigmas=None, upper=10.0, z=1j, tol=1e-8, n_samples=10000):
    """Poles needed for ``tol`` on ``[sigma, upper]`` versus sigma."""
    sigmas = np.logspace(-4, 0, 20) if sigmas is None else np.asarray(sigmas)
    Ps = [required_poles(SpectralBounds(float(s), upper), z, tol, n_samples) for s in sigmas]
    logk = np.log10(upper / sigmas)
    slope, icpt, r2 = linear_fit(logk, Ps)
    summary = {"sigma": sigmas.tolist(), "P": Ps, "slope_per_decade": slope, "intercept": icpt,
               "r_squared": r2,
               "non_increasing_in_sigma": bool(all(Ps[i + 1] <= Ps[i] for i in range(len(Ps) - 1)))}
    return _write(out_dir, "numpoles", ["sigma", "log10_condition", "P"],
                  zip(sigmas.tolist(), logk.tolist(), Ps), summary)


def fig_z_sweep(out_dir=None, P=60, m=1.0, M=1000.0, re_range=(-50.0, 0.0), im_range=(-50.0, 50.0),
                n_grid=50, n_samples=10000):
    """Scalar sup error over a grid of shifts for a fixed contour."""
    c = build_contour(SpectralBounds(m, M), P)
    re = np.linspace(*re_range, n_grid)
    im = np.linspace(*im_range, n_grid)
    Z = (re[:, None] + 1j * im[None, :]).ravel()
    errs = scalar_error_sup_many(c, (m, M), Z, n_samples)
    ref = scalar_error_sup(c, (m, M), 1j, n_samples)
    summary = {"P": P, "max_error": float(errs.max()), "min_error": float(errs.min()),
               "ratio": float(errs.max() / errs.min()), "error_at_i": ref}
    return _write(out_dir, "z_sweep", ["re_z", "im_z", "error"],
                  zip(Z.real.tolist(), Z.imag.tolist(), errs.tolist()), summary)


def _indefinite_grid_problem(points, seed):
    gh = gen_grid_hamiltonian(points=points, length=float(points) / 6.4, potential="gaussian",
                              depths=[-6.0, -5.0, -4.0], width=0.6, seed=seed)
    eig = dense_generalized_eig(gh.pencil)
    split = eig.split()
    rng = np.random.default_rng(seed)
    b = project_out(split.Psi_minus, gh.pencil, rng.standard_normal(gh.n))
    return gh, split, b


def bench_compare(out_dir=None, points=256, P=None, n_shifts=101, eta_max=10.0, tol=1e-7,
                  seed=0, sub_tol=1e-7):
    """Pole expansion (preconditioned GMRES sub-solves) against multi-shift Lanczos.

    The Lanczos run is stopped at the pole method's worst residual.
    """
    gh, split, b = _indefinite_grid_problem(points, seed)
    bounds = split.positive_bounds()
    if P is None:
        P = required_poles(bounds, 1j, 1e-9)
    contour = build_contour(bounds, P)
    etas = np.linspace(-eta_max, eta_max, n_shifts)
    shifts = 1j * etas
    cfg = SubSolveConfig(tol=sub_tol, method="gmres", preconditioner=gh.preconditioner)

    t0 = time.perf_counter()
    sols, rep = solve_indefinite(gh.pencil, split, b, shifts, cfg, project_basis_vectors=True,
                                 contour=contour)
    t_pole = time.perf_counter() - t0
    stop = rep.worst_residual

    t0 = time.perf_counter()
    lz = multishift_solve(gh.pencil, b, shifts, stop, variant="cg", projection_basis=split.Psi_minus)
    t_lz = time.perf_counter() - t0

    summary = {
        "n": gh.n, "P": P, "n_shifts": n_shifts, "n_negative": int(split.Psi_minus.shape[1]),
        "pole_worst_residual": stop, "pole_subsolve_iterations": rep.counters.subsolve_iterations,
        "pole_time_s": t_pole,
        "lanczos_worst_residual": float(lz.residuals.max()), "lanczos_iterations": lz.iterations,
        "lanczos_time_s": t_lz, "lanczos_all_converged": bool(lz.converged.all()),
    }
    rows = zip(etas.tolist(), rep.shift_residuals.tolist(), lz.residuals.tolist())
    return _write(out_dir, "compare", ["eta", "pole_residual", "lanczos_residual"], rows, summary)


def _mass_matrix(n):
    import scipy.sparse as sp
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i - 1) % n, (i + 1) % n])
    vals = np.concatenate([np.full(n, 2.0 / 3.0), np.full(2 * n, 1.0 / 6.0)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def multi_rhs_problem(n=1000, seed=0):
    """Sparse positive definite pencil: grid Hamiltonian with a tridiagonal mass matrix."""
    gh = gen_grid_hamiltonian(points=n, length=n / 10.0, potential="gaussian", depths=[2.0, 3.0],
                              width=1.0, offset=1.0, seed=seed)
    return Pencil(gh.pencil.H.A, _mass_matrix(n))


def bench_multi_rhs(out_dir=None, n=1000, n_rhs=20, P=40, n_shifts=11, seed=0, bounds=None):
    """One set of P/2 factorizations reused for many right-hand sides."""
    pencil = multi_rhs_problem(n, seed)
    if bounds is None:
        # Rayleigh-quotient bounds: H in [1, 2/h^2 + 6], S in [1/3, 1]
        h = 0.1
        bounds = SpectralBounds(1.0, (6.0 + 2.0 / h**2) * 3.0)
    contour = build_contour(bounds, P)
    rng = np.random.default_rng(seed)
    rhs = [rng.standard_normal(n) for _ in range(n_rhs)]
    shifts = 1j * np.linspace(-10, 10, n_shifts)
    cfg = SubSolveConfig(method="direct")

    t0 = time.perf_counter()
    sols, counters = solve_multi_rhs(pencil, contour, rhs, shifts, cfg)
    t_reuse = time.perf_counter() - t0
    sols_lm, counters_lm = solve_multi_rhs(pencil, contour, rhs, shifts, cfg, low_memory=True)
    rows = []
    fresh_identical = True
    for r, b in enumerate(rhs):
        fresh, rep = solve_many(pencil, contour, b, shifts, cfg)
        same = np.array_equal(fresh, sols[r]) and np.array_equal(sols_lm[r], sols[r])
        fresh_identical &= bool(same)
        rows.append((r, rep.worst_residual, float(np.max(np.abs(fresh - sols[r])))))
    summary = {"n": n, "n_rhs": n_rhs, "P": P, "factorizations": counters.factorizations,
               "factorizations_low_memory": counters_lm.factorizations,
               "bit_identical_to_fresh": fresh_identical, "time_reuse_s": t_reuse}
    return _write(out_dir, "multi_rhs", ["rhs_index", "worst_residual", "max_diff_vs_fresh"],
                  rows, summary)


def bench_scaling(out_dir=None, points=256, P=40, n_z_list=(3, 11, 101, 1001), seed=0):
    """Combine-phase work versus number of shifts for a fixed basis."""
    gh = gen_grid_hamiltonian(points=points, length=points / 6.4, potential="gaussian",
                              depths=[2.0], offset=0.5, seed=seed)
    eig = dense_generalized_eig(gh.pencil)
    bounds = SpectralBounds(float(eig.lambdas.min()), float(eig.lambdas.max()))
    contour = build_contour(bounds, P)
    b = np.random.default_rng(seed).standard_normal(gh.n)
    rows = []
    for nz in n_z_list:
        basis = compute_basis(gh.pencil, contour, b, SubSolveConfig(method="direct"))
        basis_ops = (basis.counters.factorizations, basis.counters.basis_solves)
        for z in 1j * np.linspace(-10, 10, nz):
            combine(basis, z)
        rows.append((nz, basis.counters.combine_ops, *basis_ops))
    nz = np.array([r[0] for r in rows], dtype=float)
    ops = np.array([r[1] for r in rows], dtype=float)
    slope, _, r2 = linear_fit(nz, ops)
    summary = {"n": gh.n, "P": P, "combine_ops_slope": slope, "slope_over_Pn": slope / (P * gh.n),
               "r_squared": r2, "basis_cost_constant": len({r[2:] for r in rows}) == 1}
    return _write(out_dir, "scaling", ["n_z", "combine_ops", "factorizations", "basis_solves"],
                  rows, summary)
