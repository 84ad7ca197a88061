"""
Exception hierarchy for heard-of analysis
"""

from typing import Optional


class HeardOfError(Exception):
    """Base class for every error raised by the package"""


class RoundRangeError(HeardOfError, IndexError):
    """A round or trace index outside the allowed range"""


class DimensionError(HeardOfError, ValueError):
    """Operands disagree on universe size or horizon"""


class EmptyPredicateError(HeardOfError, ValueError):
    """A delivered or heard-of predicate without any collection"""


class ParameterError(HeardOfError, ValueError):
    """A constructor parameter outside its domain"""


class StrategyError(HeardOfError, ValueError):
    """A strategy operation without a usable representation"""


class DomainError(HeardOfError, ValueError):
    """An input violates the precondition of a construction"""


class PreconditionError(HeardOfError, ValueError):
    """An analysis was requested on inputs its theorem does not cover"""


class EnumerationCapError(HeardOfError, RuntimeError):
    """The candidate space of an enumeration exceeds the configured cap"""

    def __init__(self, what: str, estimate: int, cap: int):
        self.what = what
        self.estimate = estimate
        self.cap = cap
        super().__init__(
            f"{what}: candidate space of {estimate:,} exceeds the cap of {cap:,} "
            f"(raise it with --cap or HEARDOF_CAP)"
        )


class ExprSyntaxError(HeardOfError, ValueError):
    """A predicate expression that does not parse"""

    def __init__(self, message: str, position: int, text: Optional[str] = None):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class IncompleteTraceError(HeardOfError, ValueError):
    """A trace where some process did not complete every round of the horizon"""

    def __init__(self, process: int, rounds: int, horizon: int):
        self.process = process
        self.rounds = rounds
        self.horizon = horizon
        super().__init__(
            f"process p{process + 1} completed {rounds} of {horizon} rounds"
        )
