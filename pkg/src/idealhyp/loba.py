"""Lobachevsky function and the volume of ideal tetrahedra.

The Lobachevsky function is

    L(theta) = -int_0^theta log|2 sin u| du,

odd and pi-periodic.  It is evaluated through the Clausen function,
L(theta) = Cl2(2 theta) / 2, using the power series

    Cl2(x) = x - x log|x| + sum_k zeta(2k) x^(2k+1) / (k (2k+1) (2 pi)^(2k))

on the fundamental interval |x| <= pi, where the ratio of successive terms
is at most 1/4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

__all__ = [
    "AngleDomainError",
    "SingularAngleError",
    "TetAngles",
    "lobachevsky",
    "lobachevsky_deriv",
    "tet_volume",
    "tet_volume_grad_hess",
    "restricted_hessian",
    "REGULAR_VOLUME",
    "SERIES_TERMS",
    "series_tail_bound",
]

SERIES_TERMS = 32

_K = np.arange(1, SERIES_TERMS + 1)
# coefficients in y = (x / 2pi)^2, highest order first for Horner
_COEFFS = (zeta(2 * _K, 1) / (_K * (2 * _K + 1)))[::-1]

SINGULAR_EPS = 1e-9


class AngleDomainError(ValueError):
    """Non-finite angle or invalid angle triple."""


class SingularAngleError(ValueError):
    """A logarithmic singularity of the volume kernel was hit."""


def series_tail_bound(terms: int = SERIES_TERMS) -> float:
    """Bound on the truncation error of Cl2 on |x| <= pi after ``terms`` terms.

    Uses zeta(2k) <= zeta(2) and y <= 1/4; the Lobachevsky error is half of this.
    """
    k = terms + 1
    return float(math.pi * zeta(2.0, 1) / (k * (2 * k + 1)) * 0.25**k / (1 - 0.25))


def _reduce(theta):
    return theta - np.pi * np.round(theta / np.pi)


def _clausen_fundamental(x):
    # x in [-pi, pi]
    y = (x / (2 * np.pi)) ** 2
    acc = np.zeros_like(x)
    for c in _COEFFS:
        acc = acc * y + c
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlog = np.where(ax > 0, x * np.log(np.where(ax > 0, ax, 1.0)), 0.0)
    return x - xlog + x * y * acc


def lobachevsky(theta):
    """Lobachevsky function, scalar or elementwise on arrays."""
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise AngleDomainError(f"non-finite angle: {theta!r}")
    out = 0.5 * _clausen_fundamental(2.0 * _reduce(arr))
    if np.ndim(theta) == 0:
        return float(out)
    return out


def lobachevsky_deriv(theta):
    """Derivative -log|2 sin theta|; raises at multiples of pi."""
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise AngleDomainError(f"non-finite angle: {theta!r}")
    s = np.abs(2.0 * np.sin(arr))
    if np.any(np.abs(_reduce(arr)) < 1e-300) or np.any(s == 0.0):
        raise SingularAngleError(f"derivative diverges at {theta!r}")
    out = -np.log(s)
    if np.ndim(theta) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class TetAngles:
    """Dihedral angles of an ideal tetrahedron.

    ``alpha`` sits on the edge pair {01, 23}, ``beta`` on {02, 13} and
    ``gamma`` on {03, 12}.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise AngleDomainError(f"non-finite angles {vals}")
        if min(vals) <= 0.0:
            raise AngleDomainError(f"angles must be positive, got {vals}")
        if abs(sum(vals) - math.pi) > 1e-12:
            raise AngleDomainError(f"angles must sum to pi, got sum {sum(vals)!r}")

    @classmethod
    def from_two(cls, alpha: float, beta: float) -> "TetAngles":
        return cls(alpha, beta, math.pi - alpha - beta)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])

    def __getitem__(self, k: int) -> float:
        return (self.alpha, self.beta, self.gamma)[k]


REGULAR = TetAngles.from_two(math.pi / 3, math.pi / 3)


def tet_volume(a: TetAngles) -> float:
    return float(np.sum(lobachevsky(a.as_array())))


REGULAR_VOLUME = tet_volume(REGULAR)


def tet_volume_grad_hess(a: TetAngles):
    """Gradient and Hessian of the volume in the three angles.

    The Hessian is diag(-cot); it is only negative definite on the plane
    of sum-zero variations.
    """
    x = a.as_array()
    if np.any(x < SINGULAR_EPS) or np.any(x > math.pi - SINGULAR_EPS):
        raise SingularAngleError(f"angle within {SINGULAR_EPS} of 0 or pi: {x}")
    grad = -np.log(2.0 * np.sin(x))
    hess = np.diag(-1.0 / np.tan(x))
    return grad, hess


_TANGENT = np.array([[1.0, -1.0, 0.0], [1.0, 1.0, -2.0]]).T / np.array([math.sqrt(2), math.sqrt(6)])


def restricted_hessian(hess: np.ndarray) -> np.ndarray:
    """Hessian restricted to {d alpha + d beta + d gamma = 0}, orthonormal basis."""
    return _TANGENT.T @ hess @ _TANGENT
