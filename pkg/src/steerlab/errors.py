"""Exception hierarchy shared by every steerlab module."""


class SteerlabError(Exception):
    """Base class for all library errors."""


class DomainError(SteerlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedError(SteerlabError, ValueError):
    """The input is well formed but the operation does not handle it."""


class ResourceLimitError(SteerlabError):
    """An enumeration or allocation would exceed a hard size cap."""


class SolverError(SteerlabError):
    """The conic solver failed numerically and no usable result exists."""


class ParseError(SteerlabError):
    """An input file does not match its schema.

    ``pointer`` is the JSON pointer of the offending element ("" for the
    document root).
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer


class ValidationError(SteerlabError):
    """Parsed data violates a physical constraint (normalisation, POVM closure)."""
