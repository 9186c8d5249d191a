"""Continuity of the ratio under apex moves, and the certified step.

Moving the apex from ``(p, q)`` to ``(p, q) + t (a, b)`` is the linear map
``A = [[1, t a / q], [0, 1 + t b / q]]``. Eigenvalues of the moved triangle
are sandwiched between ``gamma_-`` and ``gamma_+`` times the original ones,
where ``gamma_-, gamma_+`` are the eigenvalues of ``(A^T A)^-1``.
"""

from dataclasses import dataclass
from math import isfinite
from math import sqrt

import numpy as np

from .bounds import LAMBDA1_FLOOR
from .exc import ArgumentError
from .exc import CannotCertifyError
from .moduli import RATIO_CEILING


DEFAULT_SAFETY = 0.9

# Steps below this abort a sweep instead of crawling toward a fixed point
MIN_STEP = 1e-6

HALF_SQRT2 = sqrt(2.0) / 2.0


@dataclass(frozen=True)
class ShearStep:
    q: float
    t: float
    a: float
    b: float

    def __post_init__(self):
        if not self.q > 0:
            raise ArgumentError(f"q must be positive, got {self.q!r}")
        if not self.t >= 0:
            raise ArgumentError(f"t must be >= 0, got {self.t!r}")
        if not self.b >= 0:
            raise ArgumentError(f"b must be >= 0, got {self.b!r}")
        if abs(self.a * self.a + self.b * self.b - 1.0) > 1e-12:
            raise ArgumentError(
                f"({self.a!r}, {self.b!r}) is not a unit direction"
            )
        if not self.q + self.t * self.b > 0:
            raise ArgumentError("The moved apex must stay above the base")

    def matrix(self):
        return np.array(
            [
                [1.0, self.t * self.a / self.q],
                [0.0, 1.0 + self.t * self.b / self.q],
            ]
        )


@dataclass(frozen=True)
class StepResult:
    t_root: float
    t_star: float
    safety: float


def inverse_metric_eigenvalues(step):
    """``(gamma_-, gamma_+)`` computed from the explicit 2 x 2 matrix."""
    a = step.matrix()
    gamma = np.linalg.eigvalsh(np.linalg.inv(a.T @ a))
    return float(gamma[0]), float(gamma[1])


def metric_gap(step):
    """``gamma_+ - gamma_-`` in closed form."""
    q, t, b = step.q, step.t, step.b
    lifted = q + t * b
    return t * sqrt(4.0 * q * lifted + t * t) / (lifted * lifted)


def ratio_deviation_bound(xi, q, t):
    """Bound on ``|xi' - xi|`` for any move of length ``<= t`` with b >= 0."""
    if not xi > 0:
        raise ArgumentError(f"xi must be positive, got {xi!r}")
    if not q > 0:
        raise ArgumentError(f"q must be positive, got {q!r}")
    if not t >= 0:
        raise ArgumentError(f"t must be >= 0, got {t!r}")
    return (1.0 + xi) * t * sqrt(4.0 * q * (q + t) + t * t) / (
        LAMBDA1_FLOOR * q * q
    )


def step_quadratic(xi_h, q):
    """Coefficients ``(A, B, C)`` of the step quadratic ``A t^2 + B t + C``."""
    scale = (1.0 + xi_h) / LAMBDA1_FLOOR
    return scale / (q * q), 2.0 * scale / q, xi_h - RATIO_CEILING


def quadratic_residual(xi_h, q, t):
    a, b, c = step_quadratic(xi_h, q)
    return (a * t + b) * t + c


def positive_root(a, b, c):
    """The positive root of ``a t^2 + b t + c`` with ``a > 0 > c``.

    The larger-magnitude (negative) root is formed without cancellation and
    the positive one recovered from the product of roots.
    """
    if not (a > 0 and c < 0):
        raise ArgumentError(f"Need a > 0 > c, got a={a!r}, c={c!r}")
    far = (-b - sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    return c / (a * far)


def t_star(xi_h, q, safety=DEFAULT_SAFETY):
    """Side of the square, anchored at its lower-left corner ``(p, q)``,
    on which every apex certifiably has ratio below 7/3.
    """
    if not (isfinite(xi_h) and xi_h < RATIO_CEILING):
        raise CannotCertifyError(xi_h)
    if not q > 0:
        raise ArgumentError(f"q must be positive, got {q!r}")
    if not 0 < safety <= 1:
        raise ArgumentError(f"safety must lie in (0, 1], got {safety!r}")

    t_root = positive_root(*step_quadratic(xi_h, q))
    return StepResult(
        t_root=t_root, t_star=t_root * HALF_SQRT2 * safety, safety=safety
    )


def check_step_floor(result, min_step=MIN_STEP):
    """True when a step is long enough for the sweep to keep marching."""
    return result.t_star >= min_step
