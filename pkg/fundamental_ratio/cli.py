"""``fundamental-ratio`` command line.

Exit codes: 0 success, 1 invalid arguments or solver failure, 2 a point
could not be certified, 3 the step size stalled, 4 I/O or certificate
schema error.
"""

from dataclasses import asdict
from dataclasses import dataclass
from functools import partial
from math import pi
from typing import Optional

import argparse
import logging
import sys

import numpy as np
from joblib import Parallel
from joblib import delayed

from . import __version__
from .bounds import certified_ratio
from .certificate import CertificateHeader
from .certificate import append_records
from .certificate import encode
from .certificate import read_certificate
from .certificate import write_header
from .config import load_config
from .continuity import t_star
from .exc import ArgumentError
from .exc import CannotCertifyError
from .exc import CertificateError
from .exc import CertificationFailure
from .exc import FileError
from .exc import FundamentalRatioError
from .exc import StallError
from .exc import SweepError
from .export import export_ratio_grid
from .export import export_region_outline
from .export import export_sweep_points
from .moduli import RATIO_CEILING
from .moduli import ModuliPoint
from .perturbation import QUAD_LOCAL_RADIUS
from .perturbation import TRI_LOCAL_RADIUS
from .perturbation import TRI_SLOPE
from .perturbation import Direction2
from .perturbation import Shape
from .perturbation import fd_slope_measure
from .perturbation import quad_first_order
from .perturbation import quad_local_crossover
from .perturbation import quad_local_upper
from .perturbation import tri_first_order
from .perturbation import tri_local_crossover
from .perturbation import tri_local_upper
from .sweep import complete_rows
from .sweep import resume_from
from .sweep import run_sweep
from .sweep import verify_coverage


log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CERTIFICATION = 2
EXIT_STALL = 3
EXIT_IO = 4

UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))

# Flags that map one-to-one onto RunConfig fields
CONFIG_FLAGS = (
    "q_min",
    "q_max",
    "p_min",
    "p_max",
    "excision_radius",
    "levels",
    "eps",
    "safety",
    "tol",
    "min_step",
    "jobs",
    "strict",
)


@dataclass(frozen=True)
class ReplayVerdict:
    mode: str
    coverage: object
    failures: tuple

    @property
    def ok(self):
        return self.coverage.covered and not self.failures

    def as_dict(self):
        witness = self.coverage.gap_witness
        return {
            "mode": self.mode,
            "ok": self.ok,
            "covered": self.coverage.covered,
            "rectangles_checked": self.coverage.rectangles_checked,
            "gap_witness": None if witness is None else asdict(witness),
            "failures": list(self.failures),
        }


def _recheck(record, config):
    name = f"record ({record.i}, {record.j}) at p={record.p!r}, q={record.q!r}"
    if not record.certified:
        return f"{name}: status {record.status.value}"
    if not record.xi_h < RATIO_CEILING:
        return f"{name}: recorded xi_h {record.xi_h!r} >= 7/3"

    bracket = certified_ratio(
        ModuliPoint(record.p, record.q).vertices(),
        config.levels,
        eps=config.eps,
        tol=config.tol,
        strict=config.strict,
    )
    try:
        step = t_star(bracket.xi_h, record.q, record.safety)
    except CannotCertifyError:
        return f"{name}: recomputed xi_h {bracket.xi_h!r} >= 7/3"
    if record.t_star > step.t_star:
        return (
            f"{name}: recorded t_star {record.t_star!r} exceeds the "
            f"recomputed {step.t_star!r}"
        )
    return None


def replay_verify(path, mode="coverage", jobs=1):
    """Audit a certificate.

    ``coverage`` checks the rectangle geometry only; ``full`` also re-solves
    every recorded point.
    """
    if mode not in ("coverage", "full"):
        raise ArgumentError(f"Unknown verification mode {mode!r}")
    header, records = read_certificate(path)
    try:
        coverage = verify_coverage(records, header.region)
    except ArgumentError as err:
        raise CertificateError(str(err), path) from err

    failures = ()
    if mode == "full":
        messages = Parallel(n_jobs=jobs)(
            delayed(_recheck)(record, header.config) for record in records
        )
        failures = tuple(m for m in messages if m is not None)
        for message in failures:
            log.error("%s", message)
    return ReplayVerdict(mode=mode, coverage=coverage, failures=failures)


def _emit(values):
    print(encode(values))


def _cmd_certify(args, config):
    region = config.region()
    settings = config.settings()
    sink = partial(append_records, args.out)

    try:
        if args.resume:
            header, records = read_certificate(args.out)
            if header.config != config:
                log.info("Resuming with the settings stored in '%s'", args.out)
            config = header.config
            region = config.region()
            settings = config.settings()
            done = complete_rows(records)
            write_header(args.out, header)
            append_records(args.out, done)
            records = resume_from(done, region, settings, sink=sink)
        else:
            write_header(args.out, CertificateHeader(config=config))
            records = run_sweep(region, settings, sink=sink)
    except SweepError as err:
        if err.record is not None:
            append_records(args.out, [err.record])
        raise

    report = verify_coverage(records, region)
    _emit(
        {
            "certificate": args.out,
            "points": len(records),
            "rows": len({r.j for r in records}),
            "covered": report.covered,
        }
    )
    if not report.covered:
        log.error("Sweep left a gap at %s", report.gap_witness)
        return EXIT_CERTIFICATION
    return EXIT_OK


def _cmd_verify(args, config):
    verdict = replay_verify(args.cert, args.mode, jobs=config.jobs)
    _emit(verdict.as_dict())
    return EXIT_OK if verdict.ok else EXIT_CERTIFICATION


def _cmd_point(args, config):
    if args.square:
        vertices = UNIT_SQUARE
    else:
        if args.p is None or args.q is None:
            raise ArgumentError("point needs --p and --q (or --square)")
        vertices = ModuliPoint(args.p, args.q).vertices()
    bracket = certified_ratio(
        vertices,
        config.levels,
        eps=config.eps,
        tol=config.tol,
        strict=config.strict,
    )
    values = asdict(bracket)
    values["xi_low"] = bracket.xi_low
    values["below_ceiling"] = bracket.xi_h < RATIO_CEILING
    _emit(values)
    return EXIT_OK


def _cmd_local(args, config):
    direction = Direction2.from_angle(args.angle)
    if args.shape == "triangle":
        ts = np.linspace(0.0, args.radius or TRI_LOCAL_RADIUS, args.rows)
        report = tri_first_order(direction)
        values = {
            "report": report.as_dict(),
            "ratio_slope": TRI_SLOPE,
            "crossover": tri_local_crossover(),
            "table": [(float(t), tri_local_upper(float(t))) for t in ts],
        }
    else:
        ts = np.linspace(0.0, args.radius or QUAD_LOCAL_RADIUS, args.rows)
        report = quad_first_order(
            direction, Direction2.from_angle(args.angle_s)
        )
        values = {
            "report": report.as_dict(),
            "crossover": quad_local_crossover(),
            "table": [(float(t), quad_local_upper(float(t), 0.0)) for t in ts],
        }
    values["local_radius"] = report.local_radius
    _emit(values)
    return EXIT_OK


def _cmd_perturb_check(args, config):
    shape = Shape(args.shape)
    direction = Direction2.from_angle(args.angle)
    dir_s = None
    if shape is Shape.SQUARE:
        dir_s = Direction2.from_angle(args.angle_s)
        expected = quad_first_order(direction, dir_s).t.ratio_slope
    else:
        expected = tri_first_order(direction).ratio_slope
    fit = fd_slope_measure(
        shape,
        direction,
        args.samples,
        dir_s=dir_s,
        levels=config.levels,
        eps=config.eps,
        tol=config.tol,
        jobs=config.jobs,
    )
    values = fit.as_dict()
    values["expected"] = expected
    _emit(values)
    return EXIT_OK


def _cmd_plot_grid(args, config):
    rows = export_ratio_grid(
        config.region(),
        args.resolution,
        config.levels,
        args.out,
        eps=config.eps,
        tol=config.tol,
        strict=config.strict,
        jobs=config.jobs,
    )
    _emit({"out": args.out, "rows": rows})
    return EXIT_OK


def _cmd_plot_sweep(args, config):
    header, records = read_certificate(args.cert)
    rows = export_sweep_points(records, args.out)
    values = {"out": args.out, "rows": rows}
    if args.outline:
        values["outline_rows"] = export_region_outline(
            header.region, args.outline
        )
    _emit(values)
    return EXIT_OK


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default="setup.cfg",
        help="ini file with a [fundamental_ratio] section",
    )
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )
    common.add_argument("--levels", type=int, help="red refinement levels")
    common.add_argument("--eps", type=float, help="post-solve padding")
    common.add_argument("--safety", type=float, help="step safety factor")
    common.add_argument("--tol", type=float, help="eigensolver tolerance")
    common.add_argument("--min-step", type=float, help="stall threshold")
    common.add_argument("--jobs", type=int, help="parallel point solves")
    common.add_argument(
        "--strict",
        action="store_const",
        const=True,
        help="round every post-solve operation outward by one ulp",
    )
    for name in ("p-min", "p-max", "q-min", "q-max", "excision-radius"):
        common.add_argument(f"--{name}", type=float)
    return common


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="fundamental-ratio",
        description="Certify lambda_2 / lambda_1 < 7/3 over triangles.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    certify = commands.add_parser(
        "certify", parents=[common], help="run the sweep"
    )
    certify.add_argument("--out", required=True, help="certificate path")
    certify.add_argument(
        "--resume",
        action="store_true",
        help="continue the certificate at --out after its last full row",
    )
    certify.set_defaults(handler=_cmd_certify)

    verify = commands.add_parser(
        "verify", parents=[common], help="audit a certificate"
    )
    verify.add_argument("--cert", required=True)
    verify.add_argument(
        "--mode", choices=("coverage", "full"), default="coverage"
    )
    verify.set_defaults(handler=_cmd_verify)

    point = commands.add_parser(
        "point", parents=[common], help="certified bracket at one shape"
    )
    point.add_argument("--p", type=float)
    point.add_argument("--q", type=float)
    point.add_argument(
        "--square", action="store_true", help="use the unit square"
    )
    point.set_defaults(handler=_cmd_point)

    local = commands.add_parser(
        "local", parents=[common], help="first-order reports and local bounds"
    )
    local.add_argument(
        "--shape", choices=("triangle", "quad"), default="triangle"
    )
    local.add_argument("--angle", type=float, default=pi / 2)
    local.add_argument("--angle-s", type=float, default=pi / 2)
    local.add_argument("--radius", type=float)
    local.add_argument("--rows", type=int, default=12)
    local.set_defaults(handler=_cmd_local)

    check = commands.add_parser(
        "perturb-check",
        parents=[common],
        help="finite-difference slope at the equilateral triangle or square",
    )
    check.add_argument(
        "--shape", choices=("equilateral", "square"), default="equilateral"
    )
    check.add_argument("--angle", type=float, default=pi / 2)
    check.add_argument("--angle-s", type=float, default=pi / 2)
    check.add_argument(
        "--samples", type=float, nargs="+", default=[0.002, 0.004, 0.008]
    )
    check.set_defaults(handler=_cmd_perturb_check)

    grid = commands.add_parser(
        "plot-grid", parents=[common], help="ratio on a grid of triangles"
    )
    grid.add_argument("--resolution", type=int, default=20)
    grid.add_argument("--out", required=True)
    grid.set_defaults(handler=_cmd_plot_grid)

    sweep = commands.add_parser(
        "plot-sweep", parents=[common], help="sweep points of a certificate"
    )
    sweep.add_argument("--cert", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--outline", help="also write the region outline")
    sweep.set_defaults(handler=_cmd_plot_sweep)

    return parser


def main(argv: Optional[list] = None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args.config).override(
            **{name: getattr(args, name) for name in CONFIG_FLAGS}
        )
        return args.handler(args, config)
    except (CertificationFailure, CannotCertifyError) as err:
        log.error("%s", err)
        return EXIT_CERTIFICATION
    except StallError as err:
        log.error("%s", err)
        return EXIT_STALL
    except FileError as err:
        log.error("%s", err)
        return EXIT_IO
    except OSError as err:
        log.error("%s: %s", err.filename, err.strerror)
        return EXIT_IO
    except FundamentalRatioError as err:
        log.error("%s", err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
