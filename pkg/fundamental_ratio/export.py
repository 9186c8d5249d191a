"""Comma-separated data files for external plotting.

All numbers are written with 17 significant digits.
"""

from math import cos
from math import pi
from math import sin
from math import sqrt

import csv
import logging

import numpy as np
from joblib import Parallel
from joblib import delayed

from .bounds import DEFAULT_EPS
from .bounds import certified_ratio
from .exc import ArgumentError
from .exc import FileError
from .fem import DEFAULT_TOL
from .moduli import EQUILATERAL
from .moduli import ModuliPoint
from .moduli import in_region


log = logging.getLogger(__name__)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as err:
        raise FileError(
            f"Cannot write data file: {err.strerror}", path
        ) from err
    log.info("Wrote %d rows to '%s'", len(rows), path)
    return len(rows)


def grid_points(spec, resolution):
    """Admissible points of a ``resolution x resolution`` grid, row-major."""
    if resolution < 2:
        raise ArgumentError(f"resolution must be >= 2, got {resolution}")
    ps = np.linspace(spec.p_min, spec.p_max, resolution)
    qs = np.linspace(spec.q_min, max(spec.top(), spec.q_min), resolution)
    points = []
    for q in qs:
        for p in ps:
            point = ModuliPoint(float(p), float(q))
            if in_region(point, spec):
                points.append(point)
    return points


def _xi_at(point, levels, eps, tol, strict):
    return certified_ratio(
        point.vertices(), levels, eps=eps, tol=tol, strict=strict
    ).xi_h


def export_ratio_grid(
    spec,
    resolution,
    levels,
    path,
    eps=DEFAULT_EPS,
    tol=DEFAULT_TOL,
    strict=False,
    jobs=1,
):
    """Write ``p,q,xi_h`` for every admissible grid point.

    Points are solved in parallel; rows keep grid order.
    """
    points = grid_points(spec, resolution)
    values = Parallel(n_jobs=jobs)(
        delayed(_xi_at)(point, levels, eps, tol, strict) for point in points
    )
    rows = [(pt.p, pt.q, xi) for pt, xi in zip(points, values)]
    if rows:
        peak = max(rows, key=lambda row: row[2])
        log.info("Largest xi_h %.12g at (%.6g, %.6g)", peak[2], *peak[:2])
    return _write_rows(path, ("p", "q", "xi_h"), rows)


def export_sweep_points(records, path):
    """Visited points and the sides of their rectangles."""
    rows = [
        (r.i, r.j, r.p, r.q, r.t_star, r.t_row_min, r.xi_h, r.status.value)
        for r in records
    ]
    return _write_rows(
        path,
        ("i", "j", "p", "q", "t_star", "t_row_min", "xi_h", "status"),
        rows,
    )


def region_outline(spec, samples=200):
    """Closed polyline around the region, then the excision circle."""
    if samples < 2:
        raise ArgumentError(f"samples must be >= 2, got {samples}")
    top = spec.top()

    def right(q):
        return min(spec.p_max, sqrt(max(0.0, 1.0 - q * q)))

    boundary = [(spec.p_min, spec.q_min)]
    for q in np.linspace(spec.q_min, top, samples):
        boundary.append((right(float(q)), float(q)))
    boundary.append((spec.p_min, top))
    boundary.append((spec.p_min, spec.q_min))

    x0, y0 = EQUILATERAL
    r = spec.excision_radius
    circle = [
        (x0 + r * cos(theta), y0 + r * sin(theta))
        for theta in np.linspace(0.0, 2.0 * pi, samples)
    ]
    return boundary, circle


def export_region_outline(spec, path, samples=200):
    boundary, circle = region_outline(spec, samples)
    rows = [("region", x, y) for x, y in boundary]
    rows += [("excision", x, y) for x, y in circle]
    return _write_rows(path, ("curve", "x", "y"), rows)
