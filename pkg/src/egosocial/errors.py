"""Exception types shared across the toolkit."""


class EgosocialError(Exception):
    """Base class for every toolkit error."""


class ConfigError(EgosocialError):
    """Invalid configuration: bad flag values, malformed pipeline configs, bad stage orders."""


class DataFormatError(EgosocialError):
    """Malformed or inconsistent input data.

    Carries the offending 1-based line number when the problem is tied to a
    specific input line.
    """

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class KeyMismatchError(EgosocialError):
    """Operation combined tracks/segments carrying different (clip_id, person_id) keys."""


class CoverageError(EgosocialError):
    """A requested frame is not covered by any segment."""


class UndefinedMetricError(EgosocialError):
    """The metric has no defined value, e.g. average precision with zero positives."""
