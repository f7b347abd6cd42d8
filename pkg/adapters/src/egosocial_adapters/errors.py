class AdapterError(Exception):
    """Base class for adapter failures."""


class UnknownFormatError(AdapterError):
    """The requested format id has no registered reader."""


class InputError(AdapterError):
    """The input file does not parse under its declared format."""
