"""Exception types shared across the pipeline.

Two families matter for the CLI exit codes: data/contract problems
(ValidationError, exit 2) and arithmetic failures (NumericError, exit 3).
"""


class HeadwayError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(HeadwayError):
    """Input data, file, or argument violates a documented contract."""


class ParseError(ValidationError):
    """A file could not be parsed; message carries the offending row."""


class UndefinedFeatureError(ValidationError):
    """A car-following feature is undefined for the given sample(s)."""


class NumericError(HeadwayError):
    """Arithmetic failure: singular solve, overflow, division by zero."""
