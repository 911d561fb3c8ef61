"""Exception types shared across the simulator and the analysis layer."""


class AgesimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AgesimError):
    """A configuration value or document is invalid."""


class EmptySeriesError(AgesimError):
    """An operation that needs at least one sample received none."""


class InsufficientDataError(AgesimError):
    """Not enough samples to compute the requested statistic."""


class MissingPhaseBinError(AgesimError):
    """A required phase bin (first stress, last stress, post-rejuvenation) is absent."""

    def __init__(self, bin_name: str):
        super().__init__(f"required bin missing: {bin_name}")
        self.bin_name = bin_name


class LedgerUnderflowError(AgesimError):
    """Attempt to delete an entity kind with no live instances."""


class ParseError(AgesimError):
    """An input file does not conform to its schema.

    ``line`` is the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateTimestampError(ParseError):
    """Two rows carry the same (metric, timestamp) pair."""


class EmptyFileError(ParseError):
    """The input file contains no data rows."""
