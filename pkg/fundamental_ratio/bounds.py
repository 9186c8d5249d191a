"""Certified two-sided eigenvalue bounds and the ratio bound built on them.

The lower bound on the first eigenvalue post-processes the Crouzeix--Raviart
eigenvalue with Liu's explicit constant; the upper bound on the second
eigenvalue comes from the Rayleigh--Poincaré principle applied to conforming
P1 eigenvectors. Every post-solve arithmetic step is padded by ``eps`` in
the direction that weakens the bound.
"""

from dataclasses import dataclass
from math import isfinite
from math import pi

import logging

import numpy as np

from .exc import ArgumentError
from .exc import LinearDependenceError
from .exc import SolverError
from .fem import DEFAULT_TOL
from .fem import ElementKind
from .fem import assemble
from .fem import smallest_eigenpairs
from .mesher import refine_polygon


log = logging.getLogger(__name__)

LIU_CONSTANT = 0.1893

DEFAULT_EPS = 1e-9

# Gram determinant and orthonormality defect threshold
GRAM_TOL = 1e-12

# Domain monotonicity: every region triangle fits in the 1 x sqrt(3)/2 box,
# whose first eigenvalue is pi^2 (1 + 4/3) ~ 23.02
LAMBDA1_FLOOR = 23.0

PI2 = pi * pi


def _down(x, strict):
    return float(np.nextafter(x, -np.inf)) if strict else float(x)


def _up(x, strict):
    return float(np.nextafter(x, np.inf)) if strict else float(x)


@dataclass(frozen=True)
class SpectralBracket:
    lam1_low: float
    lam1_h: float
    lam2_up: float
    xi_h: float
    h: float
    eps: float
    lam1_up: float
    lam2_h: float
    lam2_low: float
    lam2_p1: float
    rayleigh_sum: float
    gram_defect: float
    dof_cr: int
    dof_p1: int

    @property
    def xi_low(self):
        """Lower ratio estimate; diagnostic only, never certified."""
        return max(self.lam2_low, 0.0) / self.lam1_up

    @property
    def midpoint(self):
        return 0.5 * (self.xi_low + self.xi_h)

    @property
    def half_width(self):
        return 0.5 * (self.xi_h - self.xi_low)


@dataclass(frozen=True)
class CrudeEnclosure:
    """Domain-monotonicity bounds valid over a whole perturbation range."""

    lam1_floor: float
    lam2_ceiling: float
    ratio_ceiling: float


def liu_lower(lam_h, h, eps=DEFAULT_EPS, strict=False):
    """Guaranteed lower bound from a Crouzeix--Raviart eigenvalue."""
    if not (isfinite(lam_h) and lam_h >= 0):
        raise ArgumentError(f"lam_h must be >= 0, got {lam_h!r}")
    if not (isfinite(h) and h > 0):
        raise ArgumentError(f"h must be positive, got {h!r}")
    ch = _up(LIU_CONSTANT * h, strict)
    denominator = _up(1.0 + _up(ch * ch * lam_h, strict), strict)
    return _down(_down(lam_h / denominator, strict) - eps, strict)


def mass_orthonormalize(vectors, mass):
    """Gram--Schmidt (two passes) in the mass inner product.

    Returns the orthonormal columns and the largest entry of
    ``V^T M V - I``.
    """
    x = np.column_stack(vectors)
    gram = x.T @ (mass @ x)
    diagonal = np.prod(np.diag(gram))
    if not diagonal > 0 or np.linalg.det(gram) / diagonal <= GRAM_TOL:
        raise LinearDependenceError(
            f"Trial vectors are linearly dependent (Gram matrix {gram})"
        )

    basis = []
    for column in x.T:
        w = column.copy()
        for _ in range(2):
            for v in basis:
                w = w - (v @ (mass @ w)) * v
        basis.append(w / np.sqrt(w @ (mass @ w)))
    v = np.column_stack(basis)

    defect = float(np.max(np.abs(v.T @ (mass @ v) - np.eye(v.shape[1]))))
    if defect > GRAM_TOL:
        raise SolverError(
            f"Orthonormality defect {defect:.3e} exceeds {GRAM_TOL:.0e}"
        )
    return v, defect


def _rayleigh_sum(pairs, system, eps, strict):
    if system.kind is not ElementKind.P1:
        raise ArgumentError(
            "The Rayleigh--Poincaré bound needs conforming (P1) trial "
            f"functions, got {system.kind.value}"
        )
    if len(pairs) != 2:
        raise ArgumentError(f"Expected 2 eigenpairs, got {len(pairs)}")

    v, defect = mass_orthonormalize([p.vector for p in pairs], system.mass)
    energy = float(np.einsum("ij,ij->", v, system.stiffness @ v))
    # tr(G^-1 A) <= tr(A) / (1 - |G - I|_2), |G - I|_2 <= 2 max|G - I|
    value = _up(_up(energy / (1.0 - 2.0 * defect), strict) + eps, strict)
    return value, defect


def rayleigh_sum_upper(pairs, system, eps=DEFAULT_EPS, strict=False):
    """Guaranteed upper bound on ``lambda_1 + lambda_2``."""
    value, _ = _rayleigh_sum(pairs, system, eps, strict)
    return value


def certified_ratio(
    vertices, levels, eps=DEFAULT_EPS, tol=DEFAULT_TOL, strict=False
):
    """Certified bracket for a triangle (or convex polygon).

    ``lam2_up = S - lam1_low`` where ``S`` bounds ``lambda_1 + lambda_2``
    from above: subtracting a lower bound of ``lambda_1`` keeps it an
    upper bound of ``lambda_2``.
    """
    mesh = refine_polygon(vertices, levels)

    cr = assemble(mesh, ElementKind.CR)
    cr_pairs = smallest_eigenpairs(cr, 2, tol)
    lam1_h = cr_pairs[0].value
    lam2_h = cr_pairs[1].value
    lam1_low = liu_lower(lam1_h, mesh.h, eps, strict)
    lam2_low = liu_lower(lam2_h, mesh.h, eps, strict)
    if not lam1_low > 0:
        raise SolverError(f"Non-positive lower bound {lam1_low!r}")

    p1 = assemble(mesh, ElementKind.P1)
    p1_pairs = smallest_eigenpairs(p1, 2, tol)
    rayleigh_sum, defect = _rayleigh_sum(p1_pairs, p1, eps, strict)

    lam2_up = _up(_up(rayleigh_sum - lam1_low, strict) + eps, strict)
    xi_h = _up((lam2_up + eps) / _down(lam1_low - eps, strict), strict)

    bracket = SpectralBracket(
        lam1_low=lam1_low,
        lam1_h=lam1_h,
        lam2_up=lam2_up,
        xi_h=xi_h,
        h=mesh.h,
        eps=eps,
        lam1_up=_up(p1_pairs[0].value + eps, strict),
        lam2_h=lam2_h,
        lam2_low=lam2_low,
        lam2_p1=p1_pairs[1].value,
        rayleigh_sum=rayleigh_sum,
        gram_defect=defect,
        dof_cr=cr.n_dofs,
        dof_p1=p1.n_dofs,
    )
    log.debug(
        "h=%.6g lam1_low=%.12g lam2_up=%.12g xi_h=%.15g defect=%.2e",
        bracket.h,
        lam1_low,
        lam2_up,
        xi_h,
        defect,
    )
    return bracket


def enclosure_lambda1_floor():
    """Lower bound on the first eigenvalue of every region triangle."""
    return LAMBDA1_FLOOR


def rectangle_eigenvalue(width, height, m=1, n=1):
    """Dirichlet eigenvalue ``(m, n)`` of a ``width x height`` rectangle."""
    return PI2 * ((m / width) ** 2 + (n / height) ** 2)


def triangle_crude_enclosure():
    """Bounds for the equilateral triangle perturbed by ``t <= 1/2``.

    Enclosing box ``1 x (1 + sqrt 3)/2`` for the first eigenvalue; inscribed
    ``1/2 x 1/10`` box, whose second eigenvalue is 116 pi^2, for the second.
    Constants are the published, rounded-outward values.
    """
    return CrudeEnclosure(
        lam1_floor=15.1586, lam2_ceiling=1144.88, ratio_ceiling=75.53
    )


def quad_crude_enclosure():
    """Bounds for the unit square perturbed by ``t, s <= 1/4``.

    Enclosing square of side 3/2 and inscribed square of side 1/2.
    """
    lam1_floor = rectangle_eigenvalue(1.5, 1.5)
    lam2_ceiling = rectangle_eigenvalue(0.5, 0.5, 1, 2)
    return CrudeEnclosure(
        lam1_floor=lam1_floor,
        lam2_ceiling=lam2_ceiling,
        ratio_ceiling=lam2_ceiling / lam1_floor,
    )


def second_order_constant(ratio_ceiling, base, strength, t_max):
    """Smallest ``C`` with ``base - strength t_max + C t_max^2 >= ceiling``."""
    if not t_max > 0:
        raise ArgumentError(f"t_max must be positive, got {t_max!r}")
    return (ratio_ceiling - base + strength * t_max) / (t_max * t_max)
