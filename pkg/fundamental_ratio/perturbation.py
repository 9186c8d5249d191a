"""First-order eigenvalue responses at the equilateral triangle and the
unit square, the resulting local upper bounds, and a finite-difference
harness that measures the same slopes from certified brackets.
"""

from dataclasses import dataclass
from enum import Enum
from math import atan2
from math import cos
from math import isfinite
from math import pi
from math import sin
from math import sqrt
from typing import Optional
from typing import Sequence

import logging

import numpy as np
from joblib import Parallel
from joblib import delayed

from .bounds import DEFAULT_EPS
from .bounds import certified_ratio
from .exc import ArgumentError
from .fem import DEFAULT_TOL
from .moduli import EQUILATERAL
from .moduli import RATIO_CEILING


log = logging.getLogger(__name__)

PI2 = pi * pi
SQRT3 = sqrt(3.0)

# Common prefactor 4 sqrt(3) / 3 of every triangle response
TRI_SCALE = 4.0 * SQRT3 / 3.0

TRI_LAMBDA1 = 16.0 * PI2 / 3.0
TRI_LAMBDA2 = 112.0 * PI2 / 9.0

# Ratio slope at the equilateral triangle, any direction:
# -(4 sqrt 3 / 3) 19683 / (6400 pi^2) = -6561 sqrt 3 / (1600 pi^2)
TRI_SLOPE = -6561.0 * SQRT3 / (1600.0 * PI2)
TRI_SECOND_ORDER = 295.0
TRI_LOCAL_RADIUS = 0.0022
TRI_T_MAX = 0.5

QUAD_LAMBDA1 = 2.0 * PI2
QUAD_LAMBDA2 = 5.0 * PI2
QUAD_RATIO = 2.5
# Weakest first-order decrease over all directions, attained at a = b
QUAD_MIN_STRENGTH = 0.509475
QUAD_MAX_STRENGTH = 1.060661
QUAD_SECOND_ORDER = 336.972
QUAD_LOCAL_RADIUS = 0.0015
QUAD_T_MAX = 0.25

# Fits whose slope uncertainty exceeds this fraction of |slope| are flagged
DEFAULT_DISCRIMINATION = 0.05


class Shape(Enum):
    EQUILATERAL = "equilateral"
    SQUARE = "square"


@dataclass(frozen=True)
class Direction2:
    a: float
    b: float

    def __post_init__(self):
        if not (isfinite(self.a) and isfinite(self.b)):
            raise ArgumentError(f"Non-finite direction ({self.a}, {self.b})")
        if abs(self.a * self.a + self.b * self.b - 1.0) > 1e-12:
            raise ArgumentError(
                f"({self.a!r}, {self.b!r}) is not a unit direction"
            )

    @classmethod
    def from_angle(cls, theta):
        return cls(cos(theta), sin(theta))

    @property
    def angle(self):
        return atan2(self.b, self.a)


@dataclass(frozen=True)
class PerturbationReport:
    nu1: float
    nu2: float
    nu3: Optional[float]
    ratio_slope: float
    local_radius: float

    def as_dict(self):
        return {
            "nu1": self.nu1,
            "nu2": self.nu2,
            "nu3": self.nu3,
            "ratio_slope": self.ratio_slope,
            "local_radius": self.local_radius,
        }


@dataclass(frozen=True)
class QuadPerturbationReport:
    """Responses to the two corner moves, decoupled at first order."""

    t: PerturbationReport
    s: PerturbationReport

    @property
    def local_radius(self):
        return self.t.local_radius

    def as_dict(self):
        return {"t": self.t.as_dict(), "s": self.s.as_dict()}


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    uncertainty: float
    intercept: float
    curvature: float
    inconclusive: bool
    samples: tuple

    def as_dict(self):
        return {
            "slope": self.slope,
            "uncertainty": self.uncertainty,
            "intercept": self.intercept,
            "curvature": self.curvature,
            "inconclusive": self.inconclusive,
            "samples": [list(s) for s in self.samples],
        }


def _quotient_slope(nu1, nu2, lam1, lam2):
    return (nu2 * lam1 - nu1 * lam2) / (lam1 * lam1)


#
# Equilateral triangle
#


def tri_d_matrix(direction):
    """Matrix of first-order couplings on the double second eigenspace.

    Its eigenvalues are the responses of the split second and third
    eigenvalues.
    """
    a, b = direction.a, direction.b
    off = -a * 6561.0 / 800.0 - b * 6561.0 * SQRT3 / 800.0
    return TRI_SCALE * np.array(
        [
            [
                a * 6561.0 * SQRT3 / 800.0
                - b * (59049.0 + 44800.0 * PI2) / 7200.0,
                off,
            ],
            [
                off,
                -a * 6561.0 * SQRT3 / 800.0
                + b * (59049.0 - 44800.0 * PI2) / 7200.0,
            ],
        ]
    )


def tri_first_order(direction):
    b = direction.b
    nu1 = TRI_SCALE * b * (-8.0 * PI2 / 3.0)
    nu2 = TRI_SCALE * (-59049.0 - 22400.0 * b * PI2) / 3600.0
    nu3 = TRI_SCALE * (59049.0 - 22400.0 * b * PI2) / 3600.0
    return PerturbationReport(
        nu1=nu1,
        nu2=nu2,
        nu3=nu3,
        ratio_slope=_quotient_slope(nu1, nu2, TRI_LAMBDA1, TRI_LAMBDA2),
        local_radius=TRI_LOCAL_RADIUS,
    )


def tri_local_upper(t):
    """Upper bound on the ratio after an apex move of length ``t``."""
    if not 0 <= t <= TRI_T_MAX:
        raise ArgumentError(f"t must lie in [0, {TRI_T_MAX}], got {t!r}")
    return RATIO_CEILING + TRI_SLOPE * t + TRI_SECOND_ORDER * t * t


def tri_local_crossover():
    """Positive zero of the local bound minus 7/3."""
    return -TRI_SLOPE / TRI_SECOND_ORDER


def perturbed_triangle(direction, t):
    x0, y0 = EQUILATERAL
    return (
        (0.0, 0.0),
        (1.0, 0.0),
        (x0 + t * direction.a, y0 + t * direction.b),
    )


#
# Unit square
#


def _quad_root(u, v):
    return sqrt(16384.0 * (u + v) ** 2 + 729.0 * (u - v) ** 2 * PI2 * PI2)


def quad_first_order(dir_t, dir_s):
    a, b = dir_t.a, dir_t.b
    c, d = dir_s.a, dir_s.b
    nu1_t = -PI2 * (a + b)
    nu1_s = PI2 * (c + d)
    nu2_t = -2.5 * (a + b) * PI2 - _quad_root(a, b) / 18.0
    nu2_s = 2.5 * (c + d) * PI2 - _quad_root(c, d) / 18.0
    return QuadPerturbationReport(
        t=PerturbationReport(
            nu1=nu1_t,
            nu2=nu2_t,
            nu3=None,
            ratio_slope=-_quad_root(a, b) / (36.0 * PI2),
            local_radius=QUAD_LOCAL_RADIUS,
        ),
        s=PerturbationReport(
            nu1=nu1_s,
            nu2=nu2_s,
            nu3=None,
            ratio_slope=-_quad_root(c, d) / (36.0 * PI2),
            local_radius=QUAD_LOCAL_RADIUS,
        ),
    )


def quad_local_upper(t, s):
    for name, value in (("t", t), ("s", s)):
        if not 0 <= value <= QUAD_T_MAX:
            raise ArgumentError(
                f"{name} must lie in [0, {QUAD_T_MAX}], got {value!r}"
            )
    return (
        QUAD_RATIO
        - QUAD_MIN_STRENGTH * (t + s)
        + QUAD_SECOND_ORDER * (t * t + s * s)
    )


def quad_local_crossover():
    return QUAD_MIN_STRENGTH / QUAD_SECOND_ORDER


def perturbed_square(dir_t, t, dir_s=None, s=0.0):
    """Perturbed unit square matching :func:`quad_first_order`.

    The bottom side stays fixed. ``dir_t = (a, b)`` moves ``(0, 1)`` to
    ``(-t a, 1 + t b)``, so ``a > 0`` pushes the left side outward and
    ``nu1 = -pi^2 (a + b)``. ``dir_s = (c, d)`` moves ``(1, 1)`` to
    ``(1 - s c, 1 - s d)``, pulling the corner inward for ``c, d > 0``,
    so ``nu1 = pi^2 (c + d)``.
    """
    c, d = (dir_s.a, dir_s.b) if dir_s is not None else (0.0, 0.0)
    return (
        (0.0, 0.0),
        (1.0, 0.0),
        (1.0 - s * c, 1.0 - s * d),
        (-t * dir_t.a, 1.0 + t * dir_t.b),
    )


#
# Finite-difference harness
#


def _shape_vertices(shape, direction, t, dir_s):
    if shape is Shape.EQUILATERAL:
        return perturbed_triangle(direction, t)
    return perturbed_square(direction, t, dir_s, 0.0)


def _bracket_at(vertices, levels, eps, tol):
    bracket = certified_ratio(vertices, levels, eps=eps, tol=tol)
    return bracket.midpoint, bracket.half_width


def fd_slope_measure(
    shape,
    direction,
    t_samples: Sequence[float],
    dir_s=None,
    levels=6,
    eps=DEFAULT_EPS,
    tol=DEFAULT_TOL,
    discrimination=DEFAULT_DISCRIMINATION,
    jobs=1,
):
    """Fit ``xi(t) = xi_0 + sigma t + c t^2`` to certified midpoints.

    The unperturbed shape is always included. Bracket half-widths are fitted
    with the same model; the systematic part cancels in ``sigma`` and the
    remaining uncertainty is the slope of the half-width plus the standard
    error of the fit.
    """
    shape = Shape(shape)
    t_samples = [float(t) for t in t_samples]
    if not t_samples:
        raise ArgumentError("At least one t sample is required")
    if any(not 0 < t <= 0.01 for t in t_samples):
        raise ArgumentError(f"t samples must lie in (0, 0.01]: {t_samples}")

    ts = np.array([0.0] + sorted(set(t_samples)))
    if len(ts) < 3:
        raise ArgumentError("Need two distinct positive t samples for a fit")

    results = Parallel(n_jobs=jobs)(
        delayed(_bracket_at)(
            _shape_vertices(shape, direction, t, dir_s), levels, eps, tol
        )
        for t in ts
    )
    mids = np.array([m for m, _ in results])
    widths = np.array([w for _, w in results])

    design = np.column_stack((np.ones_like(ts), ts, ts * ts))
    coef, _, _, _ = np.linalg.lstsq(design, mids, rcond=None)
    width_coef, _, _, _ = np.linalg.lstsq(design, widths, rcond=None)

    dof = len(ts) - 3
    if dof > 0:
        residual = mids - design @ coef
        sigma2 = float(residual @ residual) / dof
        covariance = sigma2 * np.linalg.inv(design.T @ design)
        standard_error = sqrt(covariance[1, 1])
    else:
        standard_error = 0.0
    uncertainty = abs(float(width_coef[1])) + standard_error

    slope = float(coef[1])
    inconclusive = not uncertainty <= discrimination * abs(slope)
    if inconclusive:
        log.warning(
            "Inconclusive slope fit on %s: %.6g +/- %.3g",
            shape.value,
            slope,
            uncertainty,
        )
    return SlopeFit(
        slope=slope,
        uncertainty=uncertainty,
        intercept=float(coef[0]),
        curvature=float(coef[2]),
        inconclusive=inconclusive,
        samples=tuple(zip(ts.tolist(), mids.tolist(), widths.tolist())),
    )
