"""Exception hierarchy shared by every module."""


class MMSError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MMSError, ValueError):
    """Malformed instance, valuation or argument."""


class CapExceeded(InputError):
    """An exhaustive routine was asked to enumerate beyond its configured cap."""


class MissingTableEntry(InputError):
    pass


class InvalidValuation(InputError):
    """A valuation violates non-negativity, monotonicity or subadditivity."""


class ZeroMMS(InputError):
    pass


class InvariantViolation(MMSError, AssertionError):
    """A structural guarantee failed at runtime; always indicates a bug."""


class MatchingIncomplete(InvariantViolation):
    pass


class InternalHallViolation(InvariantViolation):
    pass


class RetriesExhausted(MMSError):
    """Randomized retry loop did not reach its acceptance condition."""

    def __init__(self, message, failing=(), best=None):
        super().__init__(message)
        self.failing = tuple(failing)
        self.best = best


class RestartsExhausted(RetriesExhausted):
    pass


class StandInFailed(MMSError):
    """A partial-allocation stand-in could not reach its quota."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
