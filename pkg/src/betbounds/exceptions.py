"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`BetBoundsError`, itself a :class:`ValueError`, so callers that only
care about "bad input" can catch ``ValueError``.
"""


class BetBoundsError(ValueError):
    pass


class OutOfRangeError(BetBoundsError):
    def __init__(self, index, value, low=0.0, high=1.0):
        self.index = index
        self.value = value
        super().__init__(f"value {value!r} at index {index} is outside [{low}, {high}]")


class EmptySampleError(BetBoundsError):
    pass


class ParameterError(BetBoundsError):
    """Bad scalar parameter (alpha, sigma, cap, grid size, ...)."""


class DomainError(BetBoundsError):
    pass


class UnsupportedDistributionError(BetBoundsError):
    pass


class HorizonDependentStrategyError(BetBoundsError):
    pass


class LevelError(BetBoundsError):
    """Negative or non-positive information level."""


class ZeroVarianceError(BetBoundsError):
    pass


class TooManyError(BetBoundsError):
    pass


class InfeasibleCenterError(BetBoundsError):
    pass


class AllCensoredError(BetBoundsError):
    def __init__(self, w):
        self.w = w
        super().__init__(f"no replicate reached width <= {w!r} before the horizon cap")


class UsageError(BetBoundsError):
    pass
