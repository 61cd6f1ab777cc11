"""Exception types raised by prefec.

Everything derives from PrefecError so callers can catch the package's
errors in one clause. The CLI maps ConfigurationError-like failures to
exit code 2 and data/parse failures to exit code 3.
"""


class PrefecError(Exception):
    """Base class for all prefec errors."""


class UnsupportedConstellationError(PrefecError):
    """Requested constellation size or geometry is not supported."""


class InfeasibleShapingError(PrefecError):
    """No shaping exponent can reach the requested entropy."""


class DimensionMismatchError(PrefecError):
    """Array shapes disagree with the constellation dimension."""


class DegenerateLabelingError(PrefecError):
    """A bit position has all its probability mass on one bit value."""


class UnsupportedInputError(PrefecError):
    """Input violates a documented restriction of the called recipe."""


class OutOfDomainError(PrefecError):
    """Scalar argument outside the mathematical domain of the function."""


class ConfigurationError(PrefecError):
    """Inconsistent or invalid run configuration."""


class TraceFormatError(PrefecError):
    """Malformed trace file. Carries the offending line number when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)
