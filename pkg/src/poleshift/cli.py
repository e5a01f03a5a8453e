"""Command-line entry point: ``poleshift <command> ...``.

Shift files are JSON arrays of ``[re, im]`` pairs.  Vectors are plain
whitespace-separated text or Matrix Market arrays.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .chi0 import apply_chi0, make_chi0_problem
from .contour import SpectralBounds, build_contour
from .lanczos import multishift_solve
from .pencil import Pencil, estimate_spectral_bounds, read_matrix_market, read_vector
from .pole_solver import solve_many
from .problems import HamiltonianSpec, gen_grid_hamiltonian
from .subsolvers import SubSolveConfig

BENCHES = {
    "compare": experiments.bench_compare,
    "multi-rhs": experiments.bench_multi_rhs,
    "decay": experiments.fig_pole_decay,
    "numpoles": experiments.fig_numpoles,
    "zsweep": experiments.fig_z_sweep,
    "scaling": experiments.bench_scaling,
}
SEEDED = {"compare", "multi-rhs", "scaling"}


def read_shifts(path) -> np.ndarray:
    with open(path) as fh:
        data = json.load(fh)
    try:
        return np.array([complex(float(re), float(im)) for re, im in data])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: shifts must be a JSON array of [re, im] pairs") from exc


def _pairs(a):
    return [[float(c.real), float(c.imag)] for c in np.ravel(a)]


def _cmd_gen_contour(args):
    c = build_contour(SpectralBounds(args.min, args.max), args.poles)
    c.save(args.out)
    print(f"wrote {args.poles} poles for [{args.min:g}, {args.max:g}] to {args.out}")


def _cmd_solve(args):
    H = read_matrix_market(args.pencil)
    S = read_matrix_market(args.overlap) if args.overlap else None
    pencil = Pencil(H, S)
    b = read_vector(args.rhs)
    if b.shape[0] != pencil.n:
        raise ValueError(f"rhs has length {b.shape[0]}, pencil has n = {pencil.n}")
    shifts = read_shifts(args.shifts)

    if args.method == "pole":
        if args.min is not None and args.max is not None:
            bounds = SpectralBounds(args.min, args.max)
        else:
            bounds = estimate_spectral_bounds(pencil, seed=args.seed)
        contour = build_contour(bounds, args.poles)
        cfg = SubSolveConfig(tol=args.tol, method=args.subsolver)
        sols, rep = solve_many(pencil, contour, b, shifts, cfg, workers=args.workers)
        res = rep.shift_residuals
        extra = {"P": args.poles, "m": bounds.m, "M": bounds.M,
                 "basis_solves": rep.counters.basis_solves}
    else:
        out = multishift_solve(pencil, b, shifts, args.tol, variant=args.variant)
        sols, res = out.solutions, out.residuals
        extra = {"iterations": out.iterations, "converged": out.converged.tolist()}

    doc = {"method": args.method, "shifts": _pairs(shifts), "residuals": res.tolist(),
           "solutions": [_pairs(u) for u in sols], **extra}
    with open(args.out, "w") as fh:
        json.dump(doc, fh)
    print(f"{len(shifts)} shifts, worst relative residual {float(np.max(res)):.3e} -> {args.out}")


def _grid_spec(arg) -> HamiltonianSpec:
    p = Path(arg)
    text = p.read_text() if p.exists() else arg
    return HamiltonianSpec.from_json(text)


def _cmd_chi0(args):
    gh = gen_grid_hamiltonian(_grid_spec(args.grid))
    omegas = [float(w) for w in args.omega_list.split(",")]
    if args.g:
        g = read_vector(args.g)
    else:
        g = np.random.default_rng(args.seed).standard_normal(gh.n)
    prob, shifted = make_chi0_problem(gh.pencil, args.ne, g, omegas)
    res = apply_chi0(prob, shifted, method=args.method, P=args.poles)
    for w, v in zip(omegas, res.values):
        print(f"omega={w:g}  g*chi0 g={float(g @ v):.10e}  |chi0 g|={np.linalg.norm(v):.6e}")
    print(f"basis solves: {res.basis_solves}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"omegas": omegas, "values": res.values.tolist(),
                       "basis_solves": res.basis_solves}, fh)


def _cmd_bench(args):
    fn = BENCHES[args.which]
    kw = {"seed": args.seed} if args.which in SEEDED else {}
    summary = fn(args.out_dir, **kw)
    scalars = {k: v for k, v in summary.items() if not isinstance(v, list)}
    print(json.dumps(scalars, indent=1))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="poleshift", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-contour", help="write pole nodes and weights as JSON")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--poles", type=int, default=60)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_contour)

    p = sub.add_parser("solve", help="solve (H - zS)u = b for a list of shifts")
    p.add_argument("--pencil", required=True, help="H in Matrix Market format")
    p.add_argument("--overlap", help="S in Matrix Market format (default identity)")
    p.add_argument("--rhs", required=True)
    p.add_argument("--shifts", required=True, help="JSON array of [re, im]")
    p.add_argument("--method", choices=["pole", "lanczos"], default="pole")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="sub-solve tolerance (pole) or per-shift tolerance (lanczos)")
    p.add_argument("--poles", type=int, default=60)
    p.add_argument("--min", type=float, help="lower spectral bound (estimated if omitted)")
    p.add_argument("--max", type=float, help="upper spectral bound (estimated if omitted)")
    p.add_argument("--subsolver", choices=["direct", "gmres", "minres"], default="direct")
    p.add_argument("--variant", choices=["cg", "minres"], default="cg")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("chi0", help="apply chi0(i omega) on a grid Hamiltonian")
    p.add_argument("--grid", required=True, help="JSON grid description (file or literal)")
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--omega-list", default="0", help="comma-separated frequencies")
    p.add_argument("--g", help="perturbation vector (random if omitted)")
    p.add_argument("--method", choices=["pole", "lanczos"], default="pole")
    p.add_argument("--poles", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_chi0)

    p = sub.add_parser("bench", help="run an experiment; writes CSV and JSON")
    p.add_argument("which", choices=sorted(BENCHES))
    p.add_argument("--out-dir", default="results")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
