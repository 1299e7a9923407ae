"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: data/schema problems exit 2, fitting
failures exit 3, usage mistakes exit 1.
"""


class MemwallError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MemwallError, ValueError):
    """A model input lies outside its mathematical domain."""


class DataError(MemwallError):
    """Measurement or report data is malformed or inconsistent."""


class ParseError(DataError):
    """Input bytes could not be parsed as the requested format."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class SchemaError(DataError):
    """Parsed data violates the table schema (bad value, duplicate row, ...)."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        suffix = f" (row {row})" if row is not None else ""
        super().__init__(message + suffix)


class MissingBaseline(DataError):
    """A frequency has multi-core rows but no single-core baseline row."""

    def __init__(self, cpu_freq_mhz: int, application: str | None = None):
        self.cpu_freq_mhz = cpu_freq_mhz
        self.application = application
        app = f" for application {application!r}" if application else ""
        super().__init__(f"no single-core baseline at {cpu_freq_mhz} MHz{app}")


class NonPositiveTime(DataError):
    """An execution time is zero or negative."""


class EmptyInput(DataError):
    """An operation requiring data received none."""


class LengthMismatch(DataError):
    """Paired sequences have different lengths."""


class TooFewSamples(DataError):
    """Not enough samples for the requested cross-validation split."""


class InsufficientSamples(DataError):
    """A study training size is not smaller than the available sample count."""


class FitError(MemwallError):
    """Model fitting failed."""


class NonFiniteObjective(FitError):
    """The objective returned NaN/inf everywhere the optimizer could start."""


class SingularSystem(FitError):
    """A linear solve failed or produced non-finite coefficients."""


class UsageError(MemwallError):
    """Bad command-line invocation."""
