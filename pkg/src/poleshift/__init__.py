"""Pole-expansion solver for shifted Hermitian systems (H - z S) u = b, Re z <= 0."""
from .contour import (
    PoleContour,
    PoleCountError,
    SpectralBounds,
    build_contour,
    eval_scalar_expansion,
    required_poles,
    scalar_error_sup,
)
from .elliptic import EllipticModulus, complete_K, complete_K_prime, jacobi_sn_cn_dn
from .lanczos import MultiShiftResult, multishift_solve
from .pencil import (
    EigenDecomposition,
    HermitianOperator,
    IndefiniteSplit,
    NotPositiveDefiniteError,
    Pencil,
    dense_generalized_eig,
    estimate_spectral_bounds,
    project_out,
    read_matrix_market,
    read_vector,
    write_matrix_market,
    write_vector,
)
from .pole_solver import (
    LeakageError,
    PoleBasis,
    SolveReport,
    combine,
    compute_basis,
    solve_indefinite,
    solve_many,
    solve_multi_rhs,
)
from .subsolvers import SingularShiftError, SubSolveConfig

__version__ = "0.1.0"

__all__ = [
    "EigenDecomposition",
    "EllipticModulus",
    "HermitianOperator",
    "IndefiniteSplit",
    "LeakageError",
    "MultiShiftResult",
    "NotPositiveDefiniteError",
    "Pencil",
    "PoleBasis",
    "PoleContour",
    "PoleCountError",
    "SingularShiftError",
    "SolveReport",
    "SpectralBounds",
    "SubSolveConfig",
    "build_contour",
    "combine",
    "complete_K",
    "complete_K_prime",
    "compute_basis",
    "dense_generalized_eig",
    "estimate_spectral_bounds",
    "eval_scalar_expansion",
    "jacobi_sn_cn_dn",
    "multishift_solve",
    "project_out",
    "read_matrix_market",
    "read_vector",
    "required_poles",
    "scalar_error_sup",
    "solve_indefinite",
    "solve_many",
    "solve_multi_rhs",
    "write_matrix_market",
    "write_vector",
]
