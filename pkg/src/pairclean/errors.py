class PaircleanError(Exception):
    """Base class for errors raised by this package."""


class DimacsError(PaircleanError, ValueError):
    """Malformed DIMACS input, or a formula outside the uniform k-CNF model."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InstanceTooWide(PaircleanError):
    """The value sets of some combination are too large to enumerate."""


class OracleCapExceeded(PaircleanError):
    """Exhaustive search was asked to cover more variables than allowed."""
