"""Pole nodes and weights for the resolvent expansion.

For a spectrum inside ``[m, M]`` with ``0 < m < M`` and a shift ``z`` with
``Re z <= 0`` the expansion reads

    1/(x - z)  ~=  sum_k  w_k / ((xi_k - z) (x - xi_k)),      x in [m, M].

The nodes come from the trapezoidal rule on the midline of the rectangle
``[-K, K] x [0, K']`` pushed through a Jacobi-sn conformal map built for the
*squared* interval ``[m^2, M^2]``, followed by the principal square root.  In
the squared variable the resolvent ``1/(sqrt(zeta) - z)`` is analytic off
``(-inf, 0]`` for every admissible ``z``, which is what makes the accuracy
independent of where ``z`` sits in the left half plane.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import EllipticModulus, complete_K, complete_K_prime, jacobi_sn_cn_dn

__all__ = [
    "SpectralBounds",
    "ContourParameters",
    "PoleContour",
    "PoleCountError",
    "contour_parameters",
    "build_contour",
    "eval_scalar_expansion",
    "scalar_error_sup",
    "scalar_error_sup_many",
    "required_poles",
]

MAX_POLES = 4096


class PoleCountError(RuntimeError):
    """Raised when no pole count up to ``MAX_POLES`` reaches the tolerance."""


@dataclass(frozen=True)
class SpectralBounds:
    m: float
    M: float

    def __post_init__(self):
        if not (0.0 < self.m < self.M) or not math.isfinite(self.M):
            raise ValueError(f"need 0 < m < M, got m={self.m!r}, M={self.M!r}")

    @property
    def width(self) -> float:
        return self.M - self.m

    @property
    def condition(self) -> float:
        return self.M / self.m


@dataclass(frozen=True)
class ContourParameters:
    k: float
    K: float
    K_prime: float
    t_nodes: np.ndarray
    bounds: SpectralBounds
    P: int
    modulus: EllipticModulus = field(repr=False)


@dataclass(frozen=True, eq=False)
class PoleContour:
    """Conjugate-closed pole set.

    ``nodes[:P//2]`` are the upper-half representatives and
    ``nodes[P//2:]`` their conjugates, in the same order; the same holds for
    ``weights``.
    """

    P: int
    nodes: np.ndarray
    weights: np.ndarray
    bounds: SpectralBounds

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.nodes.shape != (self.P,) or self.weights.shape != (self.P,):
            raise ValueError("nodes and weights must both have length P")

    @property
    def half(self) -> int:
        return self.P // 2

    @property
    def upper_nodes(self) -> np.ndarray:
        return self.nodes[: self.half]

    @property
    def upper_weights(self) -> np.ndarray:
        return self.weights[: self.half]

    def conjugate_partner(self, j: int) -> int:
        return (j + self.half) % self.P

    def distance_to_interval(self) -> float:
        x = np.clip(self.nodes.real, self.bounds.m, self.bounds.M)
        return float(np.min(np.abs(self.nodes - x)))

    def to_dict(self) -> dict:
        return {
            "P": self.P,
            "m": self.bounds.m,
            "M": self.bounds.M,
            "nodes": [[float(c.real), float(c.imag)] for c in self.nodes],
            "weights": [[float(c.real), float(c.imag)] for c in self.weights],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoleContour":
        nodes = np.array([complex(a, b) for a, b in d["nodes"]])
        weights = np.array([complex(a, b) for a, b in d["weights"]])
        return cls(int(d["P"]), nodes, weights, SpectralBounds(float(d["m"]), float(d["M"])))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "PoleContour":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _check_P(P) -> int:
    if int(P) != P or P < 2 or P % 2:
        raise ValueError(f"pole count must be an even integer >= 2, got {P!r}")
    return int(P)


def contour_parameters(bounds: SpectralBounds, P: int) -> ContourParameters:
    P = _check_P(P)
    # modulus of the map for the squared interval [m^2, M^2]
    mod = EllipticModulus.from_ratio(bounds.M / bounds.m)
    K = complete_K(mod)
    Kp = complete_K_prime(mod)
    half = P // 2
    j = np.arange(1, half + 1)
    t = -K + 0.5j * Kp + (j - 0.5) * 2.0 * K / half
    return ContourParameters(mod.k, K, Kp, t, bounds, P, mod)


def build_contour(bounds: SpectralBounds, P: int) -> PoleContour:
    """Nodes and weights of the ``P``-pole expansion on ``bounds``."""
    par = contour_parameters(bounds, P)
    half = P // 2
    kinv = 1.0 / par.k
    scale = bounds.m * bounds.M  # sqrt(m^2 M^2)

    sn, cn, dn = jacobi_sn_cn_dn(par.t_nodes, par.modulus)
    zeta = scale * (kinv + sn) / (kinv - sn)
    dzeta_dt = scale * 2.0 * kinv * cn * dn / (kinv - sn) ** 2
    xi = np.sqrt(zeta)
    dxi_dt = dzeta_dt / (2.0 * xi)
    # t runs left to right over the top, i.e. clockwise around [m, M]; the
    # sign below already accounts for that and for x - xi in the denominator
    w = (2.0 * par.K / half) * dxi_dt / (2j * np.pi)

    nodes = np.concatenate([xi, xi.conj()])
    weights = np.concatenate([w, w.conj()])
    return PoleContour(P, nodes, weights, bounds)


def eval_scalar_expansion(contour: PoleContour, x, z: complex):
    """f_P(x; z) = sum_k w_k / ((xi_k - z)(x - xi_k)); vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    coef = contour.weights / (contour.nodes - z)
    vals = (1.0 / (x[..., None] - contour.nodes)) @ coef
    return vals if vals.ndim else complex(vals)


def scalar_error_sup(contour: PoleContour, interval, z: complex, n_samples: int = 10000) -> float:
    lo, hi = interval
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    x = np.linspace(lo, hi, n_samples)
    return float(np.max(np.abs(eval_scalar_expansion(contour, x, z) - 1.0 / (x - z))))


def scalar_error_sup_many(contour: PoleContour, interval, zs, n_samples: int = 10000,
                          chunk: int = 256) -> np.ndarray:
    """``scalar_error_sup`` for every shift in ``zs`` at once."""
    lo, hi = interval
    x = np.linspace(lo, hi, n_samples)
    zs = np.ravel(np.asarray(zs, dtype=complex))
    G = 1.0 / (x[None, :] - contour.nodes[:, None])
    out = np.empty(zs.size)
    for s in range(0, zs.size, chunk):
        zc = zs[s:s + chunk]
        C = contour.weights[None, :] / (contour.nodes[None, :] - zc[:, None])
        err = C @ G - 1.0 / (x[None, :] - zc[:, None])
        out[s:s + chunk] = np.abs(err).max(axis=1)
    return out


def required_poles(bounds: SpectralBounds, z: complex, tol: float,
                   n_samples: int = 10000) -> int:
    """Smallest even P whose scalar sup error on ``bounds`` is at most ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    interval = (bounds.m, bounds.M)

    def ok(P):
        return scalar_error_sup(build_contour(bounds, P), interval, z, n_samples) <= tol

    lo, hi = 0, 2  # lo fails (or is the empty rule), hi is the candidate
    while not ok(hi):
        lo, hi = hi, 2 * hi
        if hi > MAX_POLES:
            raise PoleCountError(
                f"tolerance {tol:g} not reached with up to {MAX_POLES} poles on [{bounds.m:g}, {bounds.M:g}]")
    # bisection over even counts in (lo, hi]
    while hi - lo > 2:
        mid = lo + ((hi - lo) // 4) * 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
