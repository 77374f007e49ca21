"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2,
InsufficientDataError -> 3, any other PulsecamError -> 4.
"""


class PulsecamError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PulsecamError):
    """Input violates a schema or an invariant (bad file, bad config)."""


class ParseError(ValidationError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(PulsecamError):
    """Not enough samples/beats/intervals to perform the operation."""


class DegenerateChannelError(PulsecamError):
    """A color channel has zero mean inside a window; cannot normalize."""


class NoSignalError(PulsecamError):
    """No in-band spectral content; caller may fall back to a previous estimate."""


class UndefinedMetricError(PulsecamError):
    """Metric has no defined value for this input (e.g. zero band power)."""


class OrderingError(PulsecamError):
    """An operation arrived out of temporal order (stream contract breach)."""


class EditError(PulsecamError):
    """An annotation edit could not be applied."""


class VersionConflictError(EditError):
    """Optimistic-lock version mismatch on a concurrent session edit."""
