"""Complete elliptic integrals and complex Jacobi elliptic functions.

Everything here is parametrized by the modulus ``k`` (not the parameter
``m = k**2`` used by scipy and some tables).  The complementary modulus
``k' = sqrt(1 - k**2)`` is carried alongside ``k`` so that callers who know
it more accurately than ``1 - k**2`` allows (e.g. ``k`` within 1e-10 of 1)
can pass it in directly through :class:`EllipticModulus`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticModulus",
    "complete_K",
    "complete_K_prime",
    "jacobi_sn_cn_dn",
]

_AGM_TOL = 1e-15
_MAX_STEPS = 64
_LANDEN_STOP = 1e-15


class EllipticConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EllipticModulus:
    k: float
    k_prime: float

    def __post_init__(self):
        if not (0.0 <= self.k < 1.0) or not (0.0 < self.k_prime <= 1.0):
            raise ValueError(f"modulus must satisfy 0 <= k < 1, got k={self.k!r}")

    @classmethod
    def from_k(cls, k: float) -> "EllipticModulus":
        k = float(k)
        if not (0.0 <= k < 1.0):
            raise ValueError(f"modulus must satisfy 0 <= k < 1, got k={k!r}")
        return cls(k, math.sqrt((1.0 - k) * (1.0 + k)))

    @classmethod
    def from_ratio(cls, r: float) -> "EllipticModulus":
        """Modulus ``(r - 1)/(r + 1)`` of the annulus-type map for ``r > 1``.

        ``k'`` is formed as ``2 sqrt(r)/(r + 1)``, which stays accurate when
        ``k`` rounds to a value very close to 1.
        """
        r = float(r)
        if not r > 1.0:
            raise ValueError(f"ratio must exceed 1, got {r!r}")
        return cls((r - 1.0) / (r + 1.0), 2.0 * math.sqrt(r) / (r + 1.0))


def _as_modulus(k) -> EllipticModulus:
    if isinstance(k, EllipticModulus):
        return k
    return EllipticModulus.from_k(k)


def _agm(a: float, b: float) -> float:
    for _ in range(_MAX_STEPS):
        if abs(a - b) <= _AGM_TOL * a:
            return 0.5 * (a + b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise EllipticConvergenceError("AGM iteration did not converge")


def complete_K(k) -> float:
    """K(k) = integral_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta), via AGM."""
    mod = _as_modulus(k)
    return math.pi / (2.0 * _agm(1.0, mod.k_prime))


def complete_K_prime(k) -> float:
    """K'(k) = K(k'), the complementary complete integral."""
    mod = _as_modulus(k)
    if mod.k == 0.0:
        raise ValueError("K'(k) diverges at k = 0; need 0 < k < 1")
    # K(k') = pi / (2 AGM(1, k'')) with k'' = k.
    return math.pi / (2.0 * _agm(1.0, mod.k))


def jacobi_sn_cn_dn(t, k):
    """Jacobi sn, cn, dn at complex ``t`` (scalar or array) for modulus ``k``.

    Uses the descending Landen (Gauss) transformation: the modulus is driven
    below 1e-15, the trigonometric limit is evaluated, and the three
    functions are rebuilt on the way back up.  Accurate for
    ``|Im t| < K'(k)``.
    """
    mod = _as_modulus(k)
    t = np.asarray(t, dtype=complex)

    # Each step maps k -> kappa = (1 - k')/(1 + k') = k^2/(1 + k')^2.
    kappas = []
    kk, kp = mod.k, mod.k_prime
    while kk > _LANDEN_STOP:
        if len(kappas) >= _MAX_STEPS:
            raise EllipticConvergenceError("Landen descent exceeded 64 steps")
        kappa = kk * kk / (1.0 + kp) ** 2
        kappas.append(kappa)
        kp = 2.0 * math.sqrt(kp) / (1.0 + kp)
        kk = kappa

    v = t
    for kappa in kappas:
        v = v / (1.0 + kappa)
    sn = np.sin(v)
    cn = np.cos(v)
    dn = np.ones_like(v)
    for kappa in reversed(kappas):
        denom = 1.0 + kappa * sn * sn
        sn, cn, dn = (
            (1.0 + kappa) * sn / denom,
            cn * dn / denom,
            (1.0 - kappa * sn * sn) / denom,
        )
    if sn.ndim == 0:
        return complex(sn), complex(cn), complex(dn)
    return sn, cn, dn
