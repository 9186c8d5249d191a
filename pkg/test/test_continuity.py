from decimal import Decimal
from decimal import localcontext
from math import atan2
from math import cos
from math import hypot
from math import isclose
from math import sin
from math import sqrt

import numpy as np
import pytest

from fundamental_ratio.bounds import LAMBDA1_FLOOR
from fundamental_ratio.bounds import certified_ratio
from fundamental_ratio.continuity import MIN_STEP
from fundamental_ratio.continuity import ShearStep
from fundamental_ratio.continuity import StepResult
from fundamental_ratio.continuity import check_step_floor
from fundamental_ratio.continuity import inverse_metric_eigenvalues
from fundamental_ratio.continuity import metric_gap
from fundamental_ratio.continuity import positive_root
from fundamental_ratio.continuity import quadratic_residual
from fundamental_ratio.continuity import ratio_deviation_bound
from fundamental_ratio.continuity import step_quadratic
from fundamental_ratio.continuity import t_star
from fundamental_ratio.exc import ArgumentError
from fundamental_ratio.exc import CannotCertifyError
from fundamental_ratio.moduli import RATIO_CEILING


def decimal_root(xi_h, q):
    with localcontext() as ctx:
        ctx.prec = 50
        xi_h = Decimal(xi_h)
        q = Decimal(q)
        scale = (1 + xi_h) / Decimal(LAMBDA1_FLOOR)
        a = scale / (q * q)
        b = 2 * scale / q
        c = xi_h - Decimal(RATIO_CEILING)
        return (-b + (b * b - 4 * a * c).sqrt()) / (2 * a)


def unit(angle):
    return cos(angle), sin(angle)


class ShearStepTest:
    def test_matrix(self):
        step = ShearStep(q=0.5, t=0.1, a=0.0, b=1.0)
        assert np.allclose(step.matrix(), [[1.0, 0.0], [0.0, 1.2]])

    @pytest.mark.parametrize(
        "values",
        [
            dict(q=0.0, t=0.1, a=0.0, b=1.0),
            dict(q=0.5, t=-0.1, a=0.0, b=1.0),
            dict(q=0.5, t=0.1, a=1.0, b=-0.0001),
            dict(q=0.5, t=0.1, a=0.6, b=0.6),
        ],
    )
    def test_invalid(self, values):
        with pytest.raises(ArgumentError):
            ShearStep(**values)


class MetricGapTest:
    def test_identity(self):
        assert metric_gap(ShearStep(q=0.5, t=0.0, a=1.0, b=0.0)) == 0.0

    def test_vertical(self):
        gap = metric_gap(ShearStep(q=0.5, t=0.1, a=0.0, b=1.0))
        assert gap == pytest.approx(0.30556, abs=5e-6)

    def test_horizontal(self):
        gap = metric_gap(ShearStep(q=0.5, t=0.1, a=1.0, b=0.0))
        assert gap == pytest.approx(0.40199, abs=5e-6)

    def test_matches_explicit_eigenvalues(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a, b = unit(rng.uniform(0.0, np.pi))
            step = ShearStep(
                q=rng.uniform(0.15, 0.9), t=rng.uniform(0.0, 0.05), a=a, b=b
            )
            low, high = inverse_metric_eigenvalues(step)
            assert 0 < low <= high
            assert high - low == pytest.approx(metric_gap(step), abs=1e-12)


class RatioDeviationBoundTest:
    def test_zero_step(self):
        assert ratio_deviation_bound(2.0, 0.5, 0.0) == 0.0

    def test_example(self):
        assert ratio_deviation_bound(2.0, 0.5, 0.1) == pytest.approx(
            0.057391, abs=5e-7
        )

    def test_dominates_every_direction(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            xi = rng.uniform(1.5, 2.4)
            q = rng.uniform(0.15, 0.9)
            t = rng.uniform(0.0, 0.05)
            a, b = unit(rng.uniform(0.0, np.pi))
            gap = metric_gap(ShearStep(q=q, t=t, a=a, b=b))
            assert (1.0 + xi) * gap / LAMBDA1_FLOOR <= ratio_deviation_bound(
                xi, q, t
            ) * (1 + 1e-12)

    @pytest.mark.parametrize(
        "xi, q, t", [(0.0, 0.5, 0.1), (2.0, 0.0, 0.1), (2.0, 0.5, -1.0)]
    )
    def test_invalid(self, xi, q, t):
        with pytest.raises(ArgumentError):
            ratio_deviation_bound(xi, q, t)


class StepTest:
    def test_quadratic_coefficients(self):
        a, b, c = step_quadratic(2.0, 0.5)
        assert a == pytest.approx(0.521739, abs=1e-6)
        assert b == pytest.approx(0.521739, abs=1e-6)
        assert c == pytest.approx(-1.0 / 3.0)

    def test_example(self):
        result = t_star(2.0, 0.5)
        assert isinstance(result, StepResult)
        assert result.t_root == pytest.approx(0.442807, abs=1e-5)
        assert result.t_star == pytest.approx(
            result.t_root * sqrt(2.0) / 2.0 * 0.9, rel=1e-15
        )
        assert 0 < result.t_star < result.t_root

    def test_decimal_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            xi_h = rng.uniform(1.0, RATIO_CEILING)
            if xi_h >= RATIO_CEILING:
                continue
            q = rng.uniform(0.1, 1.0)
            expected = float(decimal_root(xi_h, q))
            assert isclose(t_star(xi_h, q).t_root, expected, rel_tol=1e-12)

    def test_near_ceiling(self):
        xi_h = RATIO_CEILING - 1e-13
        result = t_star(xi_h, 0.5)
        assert 0 < result.t_root < 1e-11
        expected = float(decimal_root(xi_h, 0.5))
        assert isclose(result.t_root, expected, rel_tol=1e-9)

    def test_residual(self):
        for xi_h, q in ((2.0, 0.5), (2.3, 0.2), (1.2, 0.86)):
            t = t_star(xi_h, q).t_root
            residual = quadratic_residual(xi_h, q, t)
            assert abs(residual) <= 1e-12 * (1 + xi_h) / (q * q)

    def test_root_closes_the_gap(self):
        result = t_star(2.2, 0.4)
        total = 2.2 + ratio_deviation_bound(2.2, 0.4, result.t_root)
        assert total == pytest.approx(RATIO_CEILING, abs=1e-12)

    def test_safety_is_linear(self):
        full = t_star(2.1, 0.3, safety=0.9)
        half = t_star(2.1, 0.3, safety=0.45)
        assert half.t_star == pytest.approx(full.t_star / 2, rel=1e-15)
        assert half.t_root == full.t_root

    @pytest.mark.parametrize(
        "xi_h", [RATIO_CEILING, 2.5, float("nan"), float("inf")]
    )
    def test_cannot_certify(self, xi_h):
        with pytest.raises(CannotCertifyError):
            t_star(xi_h, 0.5)

    @pytest.mark.parametrize(
        "q, safety", [(0.0, 0.9), (0.5, 0.0), (0.5, 1.5)]
    )
    def test_invalid(self, q, safety):
        with pytest.raises(ArgumentError):
            t_star(2.0, q, safety)

    def test_positive_root_preconditions(self):
        with pytest.raises(ArgumentError):
            positive_root(1.0, 1.0, 1.0)
        with pytest.raises(ArgumentError):
            positive_root(0.0, 1.0, -1.0)

    def test_step_floor(self):
        assert check_step_floor(StepResult(1.0, MIN_STEP, 0.9))
        assert not check_step_floor(StepResult(1e-6, 0.5e-6, 0.9))
        assert check_step_floor(StepResult(1.0, 1e-7, 0.9), min_step=1e-8)


class CoverageGeometryTest:
    @pytest.mark.parametrize("xi_h, q", [(2.0, 0.5), (2.3, 0.16)])
    def test_square_corners(self, xi_h, q):
        result = t_star(xi_h, q, safety=1.0)
        side = result.t_star
        for dx in np.linspace(0.0, side, 11):
            for dy in np.linspace(0.0, side, 11):
                length = hypot(dx, dy)
                assert length <= result.t_root * (1 + 1e-15)
                if length == 0:
                    continue
                a, b = unit(atan2(dy, dx))
                assert b >= 0
                step = ShearStep(q=q, t=length, a=a, b=b)
                moved = xi_h + (1.0 + xi_h) * metric_gap(step) / (
                    LAMBDA1_FLOOR
                )
                assert moved <= RATIO_CEILING + 1e-12


class SandwichTest:
    @pytest.mark.slow
    def test_certified_brackets(self):
        rng = np.random.default_rng(29)
        checked = 0
        while checked < 50:
            p, q = rng.uniform(0.5, 0.95), rng.uniform(0.2, 0.85)
            if p * p + q * q > 0.98:
                continue
            t = rng.uniform(0.0, 0.05)
            a, b = unit(rng.uniform(0.0, np.pi))
            base = certified_ratio(((0.0, 0.0), (1.0, 0.0), (p, q)), 4)
            moved = certified_ratio(
                ((0.0, 0.0), (1.0, 0.0), (p + t * a, q + t * b)), 4
            )
            bound = ratio_deviation_bound(base.xi_h, q, t)
            assert moved.xi_low <= base.xi_h + bound, (p, q, t, a, b)
            assert moved.xi_h >= base.xi_low - bound, (p, q, t, a, b)
            checked += 1
