"""Newline-delimited certificate files.

The first line is a header describing the run; every further line is one
visited point. Floats are written with 17 significant digits so that reading
a certificate back reproduces every double exactly.
"""

from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace
from enum import Enum
from math import isfinite
from typing import Optional

import json
import logging

from packaging.version import InvalidVersion
from packaging.version import Version

from . import __version__
from .config import RunConfig
from .exc import ArgumentError
from .exc import CertificateError
from .moduli import RegionSpec


log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

HEADER_KIND = "header"
RECORD_KIND = "record"


class RecordStatus(Enum):
    CERTIFIED = "certified"
    FAILED = "failed"
    STALLED = "stalled"


def _config_from_dict(values):
    defaults = RunConfig()
    return RunConfig(
        **{k: type(getattr(defaults, k))(v) for k, v in values.items()}
    )


@dataclass(frozen=True)
class CertificateHeader:
    config: RunConfig
    schema_version: str = SCHEMA_VERSION
    code_version: str = __version__

    @property
    def region(self):
        return self.config.region()

    def as_dict(self):
        return {
            "kind": HEADER_KIND,
            "schema_version": self.schema_version,
            "code_version": self.code_version,
            "config": asdict(self.config),
        }

    @classmethod
    def from_dict(cls, values, path=None, line=None):
        try:
            config = _config_from_dict(values["config"])
            return cls(
                config=config,
                schema_version=str(values["schema_version"]),
                code_version=str(values["code_version"]),
            )
        except (AttributeError, KeyError, TypeError, ValueError) as err:
            raise CertificateError(
                f"Malformed certificate header: {err}", path, line
            ) from err


@dataclass(frozen=True)
class CertificateRecord:
    """One visited point and the rectangle it certifies.

    ``t_root`` and ``t_star`` are None on failed records; ``t_row_min`` is
    None until the row is complete.
    """

    region: RegionSpec
    i: int
    j: int
    p: float
    q: float
    h: float
    dof_cr: int
    dof_p1: int
    lam1_h: float
    lam1_low: float
    rayleigh_sum: float
    lam2_up: float
    xi_h: float
    t_root: Optional[float]
    t_star: Optional[float]
    t_row_min: Optional[float]
    eps: float
    safety: float
    status: RecordStatus = RecordStatus.CERTIFIED
    schema_version: str = SCHEMA_VERSION

    @property
    def certified(self):
        return self.status is RecordStatus.CERTIFIED

    def with_row_min(self, t_row_min):
        return replace(self, t_row_min=t_row_min)

    def rectangle(self):
        """``(p0, p1, q0, q1)`` of the certified rectangle."""
        if not self.certified or self.t_row_min is None:
            raise ArgumentError(
                f"Record ({self.i}, {self.j}) carries no complete rectangle"
            )
        return (
            self.p,
            self.p + self.t_star,
            self.q,
            self.q + self.t_row_min,
        )

    def as_dict(self):
        values = {"kind": RECORD_KIND}
        for f in fields(self):
            values[f.name] = getattr(self, f.name)
        values["region"] = self.region.as_dict()
        values["status"] = self.status.value
        return values

    @classmethod
    def from_dict(cls, values, path=None, line=None):
        values = dict(values)
        values.pop("kind", None)
        try:
            values["region"] = RegionSpec.from_dict(values["region"])
            values["status"] = RecordStatus(values["status"])
            for name in ("i", "j", "dof_cr", "dof_p1"):
                values[name] = int(values[name])
            for name in _FLOAT_FIELDS:
                if values[name] is not None:
                    values[name] = float(values[name])
            return cls(**values)
        except (KeyError, TypeError, ValueError) as err:
            raise CertificateError(
                f"Malformed certificate record: {err}", path, line
            ) from err


_FLOAT_FIELDS = (
    "p",
    "q",
    "h",
    "lam1_h",
    "lam1_low",
    "rayleigh_sum",
    "lam2_up",
    "xi_h",
    "t_root",
    "t_star",
    "t_row_min",
    "eps",
    "safety",
)


def encode(value):
    """JSON text with every float written to 17 significant digits."""
    if value is None or isinstance(value, (bool, int, str)):
        return json.dumps(value)
    if isinstance(value, float):
        if not isfinite(value):
            raise ArgumentError(f"Cannot serialize non-finite {value!r}")
        return format(value, ".17g")
    if isinstance(value, dict):
        items = (f"{json.dumps(k)}: {encode(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in value) + "]"
    raise ArgumentError(f"Cannot serialize {type(value).__name__}")


def dumps(item):
    """One certificate line, without the trailing newline."""
    return encode(item.as_dict())


def loads(text, path=None, line=None):
    try:
        values = json.loads(text)
    except json.JSONDecodeError as err:
        raise CertificateError(
            f"Unparseable certificate line: {err.msg}", path, line
        ) from err
    if not isinstance(values, dict):
        raise CertificateError("Certificate line is not an object", path, line)

    kind = values.get("kind")
    if kind == HEADER_KIND:
        return CertificateHeader.from_dict(values, path, line)
    if kind == RECORD_KIND:
        return CertificateRecord.from_dict(values, path, line)
    raise CertificateError(f"Unknown line kind {kind!r}", path, line)


def check_schema(schema_version, path=None, line=None):
    """Accept any schema with the same major version as this code's."""
    try:
        found = Version(schema_version)
    except InvalidVersion as err:
        raise CertificateError(
            f"Invalid schema version {schema_version!r}", path, line
        ) from err
    if found.major != Version(SCHEMA_VERSION).major:
        raise CertificateError(
            f"Schema {found} is incompatible with {SCHEMA_VERSION}",
            path,
            line,
        )


def write_header(path, header):
    """Start a new certificate, replacing any file at ``path``."""
    try:
        with open(path, "w") as f:
            f.write(dumps(header) + "\n")
    except OSError as err:
        raise CertificateError(
            f"Cannot write certificate: {err.strerror}", path
        ) from err
    log.info("Certificate header written to '%s'", path)


def append_records(path, records):
    try:
        with open(path, "a") as f:
            for record in records:
                f.write(dumps(record) + "\n")
    except OSError as err:
        raise CertificateError(
            f"Cannot append to certificate: {err.strerror}", path
        ) from err


def read_certificate(path):
    """Return ``(header, records)`` read from ``path``.

    A last line without its newline was cut short by an interrupted write
    and is rejected like any other malformed line.
    """
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise CertificateError(
            f"Cannot read certificate: {err.strerror}", path
        ) from err

    if not text:
        raise CertificateError("Empty certificate", path)
    lines = text.split("\n")
    if lines[-1]:
        raise CertificateError("Truncated certificate", path, len(lines))
    lines.pop()

    header = loads(lines[0], path, 1)
    if not isinstance(header, CertificateHeader):
        raise CertificateError("First line is not a header", path, 1)
    check_schema(header.schema_version, path, 1)

    records = []
    for number, line in enumerate(lines[1:], start=2):
        record = loads(line, path, number)
        if not isinstance(record, CertificateRecord):
            raise CertificateError("Unexpected second header", path, number)
        check_schema(record.schema_version, path, number)
        records.append(record)

    log.debug("Read %d records from '%s'", len(records), path)
    return header, records
