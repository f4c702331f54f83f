"""Exception types raised across the package."""


class InvalidSizeError(ValueError):
    """An input has too few elements (empty file, M < 2, ...)."""


class DegenerateDistributionError(ValueError):
    """A propensity distribution has no positive mass."""


class UnsupportedRegimeError(ValueError):
    """Some propensity exceeds the acceptance threshold."""


class ContractViolationError(ValueError):
    """An argument breaks a documented precondition."""


class DistributionFormatError(ValueError):
    """A distribution file could not be parsed.

    ``line`` is the 1-based line number of the offending entry.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NetworkFormatError(ValueError):
    """A network document is malformed or inconsistent."""


class ConsistencyError(RuntimeError):
    """Internal invariant broken during simulation (negative count)."""
