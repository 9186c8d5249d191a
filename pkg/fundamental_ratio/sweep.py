"""Grid-marching certification of the triangle parameter region and an
independent audit of the rectangles it emits.

Each visited point ``(p, q)`` certifies the rectangle
``[p, p + t_star] x [q, q + t_row_min]``. A row advances in ``p`` by the
local step and the next row starts ``t_row_min`` higher, ``t_row_min``
being the smallest step of the finished row.
"""

from dataclasses import dataclass
from dataclasses import field
from math import inf
from math import isfinite
from math import sqrt
from typing import Callable
from typing import List
from typing import Optional

import logging

from .bounds import DEFAULT_EPS
from .bounds import certified_ratio
from .certificate import CertificateRecord
from .certificate import RecordStatus
from .continuity import DEFAULT_SAFETY
from .continuity import MIN_STEP
from .continuity import check_step_floor
from .continuity import t_star
from .exc import ArgumentError
from .exc import CertificationFailure
from .exc import StallError
from .fem import DEFAULT_TOL
from .moduli import RATIO_CEILING
from .moduli import ModuliPoint
from .moduli import in_region
from .moduli import inside_unit_disk
from .moduli import outside_excision
from .moduli import reentry_p


log = logging.getLogger(__name__)

DEFAULT_START_OFFSET = 1e-9


@dataclass(frozen=True)
class SweepSettings:
    levels: int = 6
    eps: float = DEFAULT_EPS
    safety: float = DEFAULT_SAFETY
    tol: float = DEFAULT_TOL
    min_step: float = MIN_STEP
    start_offset: float = DEFAULT_START_OFFSET
    strict: bool = False

    def __post_init__(self):
        if self.levels < 0:
            raise ArgumentError(f"levels must be >= 0, got {self.levels}")
        if not self.eps >= 0:
            raise ArgumentError(f"eps must be >= 0, got {self.eps!r}")
        if not 0 < self.safety <= 1:
            raise ArgumentError(
                f"safety must lie in (0, 1], got {self.safety!r}"
            )
        if not self.min_step > 0:
            raise ArgumentError(
                f"min_step must be positive, got {self.min_step!r}"
            )
        if not 0 <= self.start_offset < self.min_step:
            raise ArgumentError(
                f"start_offset must lie in [0, min_step), "
                f"got {self.start_offset!r}"
            )


@dataclass
class SweepState:
    i: int
    j: int
    p_current: float
    q_current: float
    t_row_min: float = inf
    records: List[CertificateRecord] = field(default_factory=list)
    row: List[CertificateRecord] = field(default_factory=list)


@dataclass(frozen=True)
class CoverageReport:
    covered: bool
    gap_witness: Optional[ModuliPoint]
    rectangles_checked: int

    def __post_init__(self):
        if self.covered == (self.gap_witness is not None):
            raise ArgumentError(
                "A coverage report has a witness exactly when not covered"
            )


def _row_start(q, spec, settings):
    """First p of the row at height ``q``, or None once the region is done.

    Admissibility is judged at ``p_min`` itself; the returned point sits
    ``start_offset`` to its left.
    """
    if q > spec.q_max or not inside_unit_disk(spec.p_min, q):
        return None
    if outside_excision(spec.p_min, q, spec):
        return spec.p_min - settings.start_offset
    p = reentry_p(q, spec)
    log.info("Row at q=%r starts in the excised disk, re-entering at %r", q, p)
    return p


def _advance_ok(p, q, spec):
    return p * p + q * q <= 1.0 and spec.p_min <= p <= spec.p_max


def _visit(state, spec, settings, certify):
    p, q = state.p_current, state.q_current
    point = ModuliPoint(p, q)
    bracket = certify(
        point.vertices(),
        settings.levels,
        eps=settings.eps,
        tol=settings.tol,
        strict=settings.strict,
    )
    values = dict(
        region=spec,
        i=state.i,
        j=state.j,
        p=p,
        q=q,
        h=bracket.h,
        dof_cr=bracket.dof_cr,
        dof_p1=bracket.dof_p1,
        lam1_h=bracket.lam1_h,
        lam1_low=bracket.lam1_low,
        rayleigh_sum=bracket.rayleigh_sum,
        lam2_up=bracket.lam2_up,
        xi_h=bracket.xi_h,
        t_row_min=None,
        eps=settings.eps,
        safety=settings.safety,
    )

    if not bracket.xi_h < RATIO_CEILING:
        record = CertificateRecord(
            t_root=None, t_star=None, status=RecordStatus.FAILED, **values
        )
        raise CertificationFailure(
            f"Cannot certify ({p!r}, {q!r}): xi_h = {bracket.xi_h!r}", record
        )

    step = t_star(bracket.xi_h, q, settings.safety)
    if not check_step_floor(step, settings.min_step):
        record = CertificateRecord(
            t_root=step.t_root,
            t_star=step.t_star,
            status=RecordStatus.STALLED,
            **values,
        )
        raise StallError(
            f"Step {step.t_star:.3e} at ({p!r}, {q!r}) is below "
            f"{settings.min_step:.1e}",
            record,
        )

    log.debug(
        "(%d, %d) p=%.12g q=%.12g xi_h=%.12g t_star=%.6g",
        state.i,
        state.j,
        p,
        q,
        bracket.xi_h,
        step.t_star,
    )
    return CertificateRecord(t_root=step.t_root, t_star=step.t_star, **values)


def _close_row(state, sink):
    row = [record.with_row_min(state.t_row_min) for record in state.row]
    state.records.extend(row)
    state.row = []
    if sink is not None:
        sink(row)
    log.info(
        "Row %d at q=%.12g done: %d points, t_row_min=%.6g",
        state.j,
        state.q_current,
        len(row),
        state.t_row_min,
    )


def _march(state, spec, settings, sink, certify):
    while True:
        record = _visit(state, spec, settings, certify)
        state.row.append(record)
        state.t_row_min = min(state.t_row_min, record.t_star)

        q = state.q_current
        p_next = state.p_current + record.t_star
        if _advance_ok(p_next, q, spec):
            if not outside_excision(p_next, q, spec):
                jump = reentry_p(q, spec)
                log.warning(
                    "Row %d stepped into the excised disk at p=%r; "
                    "jumping to %r",
                    state.j,
                    p_next,
                    jump,
                )
                p_next = jump
            if p_next <= spec.p_max:
                state.i += 1
                state.p_current = p_next
                continue

        _close_row(state, sink)
        q_next = q + state.t_row_min
        p_start = _row_start(q_next, spec, settings)
        if p_start is None:
            break
        state.i = 0
        state.j += 1
        state.p_current = p_start
        state.q_current = q_next
        state.t_row_min = inf

    log.info(
        "Sweep finished after %d rows and %d points",
        state.j + 1,
        len(state.records),
    )
    return state.records


def run_sweep(
    spec,
    settings=None,
    sink: Optional[Callable] = None,
    certify=certified_ratio,
):
    """Certify every triangle of ``spec`` and return the records.

    ``sink`` receives each row's records once the row is complete.
    """
    settings = settings or SweepSettings()
    q0 = spec.q_min - settings.start_offset
    p0 = _row_start(q0, spec, settings)
    if p0 is None:
        log.info("Region %s is empty", spec)
        return []
    state = SweepState(i=0, j=0, p_current=p0, q_current=q0)
    return _march(state, spec, settings, sink, certify)


def complete_rows(records):
    """The records of every row whose ``t_row_min`` is known."""
    return [r for r in records if r.certified and r.t_row_min is not None]


def resume_from(
    records,
    spec,
    settings=None,
    sink: Optional[Callable] = None,
    certify=certified_ratio,
):
    """Continue a sweep after the last complete row of ``records``.

    Returns the complete rows followed by the newly visited ones; partial
    rows are dropped and revisited.
    """
    settings = settings or SweepSettings()
    done = complete_rows(records)
    if not done:
        return run_sweep(spec, settings, sink, certify)
    if any(r.region != spec for r in done):
        raise ArgumentError("Records belong to a different region")

    dropped = len(records) - len(done)
    if dropped:
        log.info("Dropping %d records of an unfinished row", dropped)

    last_j = max(r.j for r in done)
    last = [r for r in done if r.j == last_j]
    q_next = last[0].q + last[0].t_row_min
    state = SweepState(
        i=0,
        j=last[0].j + 1,
        p_current=0.0,
        q_current=q_next,
        records=list(done),
    )
    p_start = _row_start(q_next, spec, settings)
    if p_start is None:
        log.info("Certificate already complete")
        return state.records
    state.p_current = p_start
    log.info("Resuming at row %d, q=%r", state.j, q_next)
    return _march(state, spec, settings, sink, certify)


#
# Coverage audit
#


def _merge(intervals):
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return merged


def _gaps(merged, lo, hi):
    gaps = []
    cursor = lo
    for a, b in merged:
        if a > cursor:
            gaps.append((cursor, min(a, hi)))
        cursor = max(cursor, b)
        if cursor >= hi:
            break
    if cursor < hi:
        gaps.append((cursor, hi))
    return [(a, b) for a, b in gaps if b > a]


def _inside(a, b):
    """Candidate abscissae strictly inside ``(a, b)``."""
    delta = min((b - a) / 4.0, 1e-9)
    return (a + delta, 0.5 * (a + b), b - delta)


def _candidates(gap, lo, hi):
    g0, g1 = gap
    ps = _inside(g0, g1)
    qs = _inside(lo, hi)
    for p in ps:
        for q in qs:
            yield p, q
    # extreme points on the unit circle
    for p in ps:
        if abs(p) < 1.0:
            q = sqrt(1.0 - p * p)
            if lo < q < hi:
                yield p, q - min((q - lo) / 4.0, 1e-9)
    for q in qs:
        if abs(q) < 1.0:
            p = sqrt(1.0 - q * q)
            if g0 < p < g1:
                yield p - min((p - g0) / 4.0, 1e-9), q


def _covered(p, q, rectangles):
    return any(
        p0 <= p <= p1 and q0 <= q <= q1 for p0, p1, q0, q1 in rectangles
    )


def verify_coverage(records, spec):
    """Decide whether the certified rectangles cover the region of ``spec``.

    The region is cut into horizontal strips at every rectangle edge. Inside
    a strip the covered abscissae are fixed, so each uncovered interval is
    checked at the extreme points of its part of the region.
    """
    rectangles = []
    for record in records:
        if not record.certified:
            continue
        if record.t_star is None or record.t_row_min is None:
            raise ArgumentError(
                f"Record ({record.i}, {record.j}) has no complete rectangle"
            )
        if not (
            isfinite(record.t_star)
            and isfinite(record.t_row_min)
            and record.t_star > 0
            and record.t_row_min > 0
        ):
            raise ArgumentError(
                f"Record ({record.i}, {record.j}) has a degenerate rectangle"
            )
        rectangles.append(record.rectangle())

    top = spec.top()
    if top <= spec.q_min:
        return CoverageReport(
            covered=True, gap_witness=None, rectangles_checked=len(rectangles)
        )
    breaks = {spec.q_min, top}
    for _, _, q0, q1 in rectangles:
        breaks.update(q for q in (q0, q1) if spec.q_min < q < top)
    breaks = sorted(breaks)

    for lo, hi in zip(breaks, breaks[1:]):
        active = [
            (p0, p1) for p0, p1, q0, q1 in rectangles if q0 <= lo and q1 >= hi
        ]
        for gap in _gaps(_merge(active), spec.p_min, spec.p_max):
            for p, q in _candidates(gap, lo, hi):
                point = ModuliPoint(p, q)
                if in_region(point, spec) and not _covered(p, q, rectangles):
                    log.info("Coverage gap at (%r, %r)", p, q)
                    return CoverageReport(
                        covered=False,
                        gap_witness=point,
                        rectangles_checked=len(rectangles),
                    )

    return CoverageReport(
        covered=True, gap_witness=None, rectangles_checked=len(rectangles)
    )
