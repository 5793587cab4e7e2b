"""Exception hierarchy shared by all modules."""


class GouldError(Exception):
    """Base class for every error raised by this package."""


# convex bodies
class EmptyBody(GouldError, ValueError):
    pass


class DimMismatch(GouldError, ValueError):
    pass


class NegativeScale(GouldError, ValueError):
    pass


class NotIncreasing(GouldError, ValueError):
    pass


class UnboundedSequence(GouldError, ValueError):
    pass


class InternalCheckFailed(GouldError, ArithmeticError):
    """Two independent computations of the same quantity disagreed,
    or a bound that must hold by construction was violated."""


# spaces and partitions
class CarrierMismatch(GouldError, ValueError):
    pass


class TooLarge(GouldError, ValueError):
    pass


# set functions
class NoWitnessNeeded(GouldError, ValueError):
    pass


class NoWitness(GouldError, ValueError):
    pass


class NoExhaustion(GouldError, ValueError):
    def __init__(self, message, block=None, alpha=None):
        super().__init__(message)
        self.block = block
        self.alpha = alpha


class NotExhaustion(GouldError, ValueError):
    pass


class NotAdditive(GouldError, ValueError):
    pass


class NotStronglyAC(GouldError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotMultisubmeasure(GouldError, ValueError):
    pass


# integration
class NotTotallyMeasurable(GouldError, ValueError):
    def __init__(self, message, eps=None):
        super().__init__(message)
        self.eps = eps


class NotAChain(GouldError, ValueError):
    pass


class NotDisjoint(GouldError, ValueError):
    pass


class HypothesisFailed(GouldError):
    """A precondition of the derivative construction does not hold.

    ``reason`` is one of ``"additive"``, ``"multisubmeasure"``, ``"b"``,
    ``"exhaustion"`` or ``"range-empty"``.
    """

    def __init__(self, reason, message, block=None, alpha=None, stage=None):
        super().__init__(f"{reason}: {message}")
        self.reason = reason
        self.block = block
        self.alpha = alpha
        self.stage = stage


# scenario files
class ParseError(GouldError, ValueError):
    pass


class InvariantError(GouldError, ValueError):
    pass
