"""Exception types shared across the package."""


class NgmziError(Exception):
    """Base class for all package errors."""


class ContractError(NgmziError, ValueError):
    """An argument violates an operation's preconditions."""


class ResourceError(NgmziError, MemoryError):
    """A requested series or basis is too large to allocate."""


class ConsistencyError(NgmziError, ArithmeticError):
    """A computed quantity left its physical range (e.g. a probability above 1).

    Raised instead of silently clipping; it signals a convention or
    transcription bug rather than bad user input.
    """


class UndefinedStateError(NgmziError, ArithmeticError):
    """The heralding event has (numerically) zero probability."""


class CutoffError(NgmziError, ValueError):
    """Fock truncation too small for the requested tail-mass tolerance."""


class HeraldImpossible(UndefinedStateError):
    """Projection onto the requested outcome has vanishing norm."""


class NoOptimumError(NgmziError, RuntimeError):
    """Every candidate point of an objective was flagged divergent."""
