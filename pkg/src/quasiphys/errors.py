"""Exception types shared across the package."""


class QuasiPhysError(Exception):
    pass


class IllFormed(QuasiPhysError, TypeError):
    """Raised when an identity statement is made about micro-atoms.

    ``x = y`` is not a formula when either side is a micro-atom, so any attempt
    to evaluate it is rejected rather than answered.
    """


class CapacityExceeded(QuasiPhysError, ValueError):
    pass


class TooLarge(QuasiPhysError, ValueError):
    pass


class NotPure(QuasiPhysError, ValueError):
    pass


class OutOfInterval(QuasiPhysError, ValueError):
    pass


class UnknownParticle(QuasiPhysError, KeyError):
    pass


class EmptySelection(QuasiPhysError, ValueError):
    pass


class DegenerateWitness(QuasiPhysError, ValueError):
    def __init__(self, message, horizon):
        super().__init__(message)
        self.horizon = horizon


class StepRejected(QuasiPhysError, ArithmeticError):
    pass


class IntervalMismatch(QuasiPhysError, ValueError):
    pass


class SingularityError(QuasiPhysError, ArithmeticError):
    def __init__(self, pair, time, separation):
        super().__init__(
            f"particles {pair[0]} and {pair[1]} reached separation "
            f"{separation:.3e} at t={time:.12g}"
        )
        self.pair = pair
        self.time = time
        self.separation = separation


class DimensionMismatch(QuasiPhysError, ValueError):
    pass


class NonUnitDirection(QuasiPhysError, ValueError):
    pass


class ConfigError(QuasiPhysError, ValueError):
    pass


# int64 ceiling used wherever a count must stay machine representable
INT_LIMIT = 2**63 - 1
