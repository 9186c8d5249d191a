"""Normalized parameter space of triangles.

A triangle is represented by its apex ``(p, q)`` once the longest side has
been scaled to the unit segment ``(0, 0) -- (1, 0)`` and reflections have
been quotiented out.
"""

from dataclasses import asdict
from dataclasses import dataclass
from math import hypot
from math import isfinite
from math import sqrt

from .exc import ArgumentError


SQRT3_2 = sqrt(3.0) / 2.0

# Apex of the equilateral triangle, centre of the excised disk
EQUILATERAL = (0.5, SQRT3_2)

# Ratio of the equilateral triangle, the value to stay strictly below
RATIO_CEILING = 7.0 / 3.0

# Rounding band around the excision circle, absolute
CIRCLE_SLACK = 4 * 2.0**-52


@dataclass(frozen=True)
class ModuliPoint:
    p: float
    q: float

    def __post_init__(self):
        if not (isfinite(self.p) and isfinite(self.q)):
            raise ArgumentError(f"Non-finite apex ({self.p!r}, {self.q!r})")

    def vertices(self):
        return ((0.0, 0.0), (1.0, 0.0), (self.p, self.q))

    def distance_to_equilateral(self):
        return hypot(self.p - EQUILATERAL[0], self.q - EQUILATERAL[1])


@dataclass(frozen=True)
class RegionSpec:
    """The part of parameter space a sweep has to cover.

    ``p^2 + q^2 <= 1`` is always enforced; the excision centre is always the
    equilateral apex.
    """

    q_min: float = 0.156
    q_max: float = 1.0
    p_min: float = 0.5
    p_max: float = 1.0
    excision_radius: float = 0.0022

    def __post_init__(self):
        if not self.q_min > 0:
            raise ArgumentError(f"q_min must be positive, got {self.q_min!r}")
        if not self.excision_radius > 0:
            raise ArgumentError(
                f"excision_radius must be positive, "
                f"got {self.excision_radius!r}"
            )
        if not self.p_min < self.p_max:
            raise ArgumentError(
                f"p_min ({self.p_min!r}) must be below p_max ({self.p_max!r})"
            )
        if not self.q_min < self.q_max:
            raise ArgumentError(
                f"q_min ({self.q_min!r}) must be below q_max ({self.q_max!r})"
            )

    @property
    def excision_center(self):
        return EQUILATERAL

    def top(self):
        """Highest q at which a slice of the region can be nonempty."""
        if abs(self.p_min) >= 1.0:
            return self.q_min
        return min(self.q_max, 1.0, sqrt(1.0 - self.p_min * self.p_min))

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        try:
            return cls(**{k: float(v) for k, v in values.items()})
        except TypeError as err:
            raise ArgumentError(f"Invalid region spec {values!r}") from err


def inside_unit_disk(p, q):
    return p * p + q * q <= 1.0


def outside_excision(p, q, spec):
    # points on the circle up to rounding count as excised
    distance = hypot(p - EQUILATERAL[0], q - EQUILATERAL[1])
    return distance > spec.excision_radius + CIRCLE_SLACK


def in_region(pt, spec):
    """True iff ``pt`` is one of the triangles the sweep must certify."""
    return (
        inside_unit_disk(pt.p, pt.q)
        and spec.p_min <= pt.p <= spec.p_max
        and spec.q_min <= pt.q <= spec.q_max
        and outside_excision(pt.p, pt.q, spec)
    )


def degenerate_ratio_bound(q):
    """Upper bound on the ratio of any triangle of apex height ``q``."""
    if not q > 0:
        raise ArgumentError(f"q must be positive, got {q!r}")
    return (1.0 + (4.0 * q * q) ** (1.0 / 3.0)) ** 3 / (q + 1.0) ** 2


def degenerate_cutoff(tol=1e-12):
    """Largest q for which :func:`degenerate_ratio_bound` stays below 7/3."""
    lo, hi = 1e-6, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if degenerate_ratio_bound(mid) < RATIO_CEILING:
            lo = mid
        else:
            hi = mid
    return lo


def reentry_p(q, spec):
    """Point on the right half of the excision circle at height ``q``."""
    r = spec.excision_radius
    dq = q - EQUILATERAL[1]
    radicand = r * r - dq * dq
    if radicand < 0:
        raise ArgumentError(
            f"q = {q!r} is farther than {r!r} from the excision centre"
        )
    return sqrt(radicand) + EQUILATERAL[0]
