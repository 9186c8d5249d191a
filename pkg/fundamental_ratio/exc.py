"""Exceptions raised by the certification engine.

Every error derives from :class:`FundamentalRatioError` so callers can catch
the whole family at once; argument errors also derive from ``ValueError``.
"""


class FundamentalRatioError(Exception):
    """Generic error class."""


class ArgumentError(FundamentalRatioError, ValueError):
    """A precondition of an operation was violated."""


class DegenerateGeometryError(ArgumentError):
    """Vertices are collinear or repeated."""


class TooCoarseError(ArgumentError):
    """The mesh has no interior degree of freedom."""


class SolverError(FundamentalRatioError):
    """The eigensolver did not reach the requested tolerance."""


class LinearDependenceError(SolverError):
    """Trial functions are numerically linearly dependent."""


class CannotCertifyError(FundamentalRatioError):
    """The certified ratio bound is not below 7/3."""

    def __init__(self, xi_h, message=None):
        self.xi_h = xi_h
        super().__init__(
            message
            or f"cannot certify from this point: xi_h = {xi_h!r} >= 7/3"
        )


class SweepError(FundamentalRatioError):
    """A sweep stopped on an offending record."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class CertificationFailure(SweepError):
    """A visited point has xi_h >= 7/3."""


class StallError(SweepError):
    """The certified step fell below the configured floor."""


class FileError(FundamentalRatioError):
    """An input or output file could not be read or written."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        context = ""
        if path is not None:
            context = f" ({path}"
            if line is not None:
                context += f", line {line}"
            context += ")"
        super().__init__(message + context)


class CertificateError(FileError):
    """A certificate is truncated, malformed or of another schema."""
