"""Exception hierarchy. Every error raised on bad input derives from MarkovError."""


class MarkovError(ValueError):
    pass


class ChainError(MarkovError):
    """Invalid chain description."""


class NonSquare(ChainError):
    pass


class NegativeRate(ChainError):
    def __init__(self, row, col, value):
        super().__init__(f"negative entry {value!r} at ({row}, {col})")
        self.row, self.col, self.value = row, col, value


class BadRowSum(ChainError):
    def __init__(self, row, total, expected):
        super().__init__(f"row {row} sums to {total!r}, expected {expected}")
        self.row, self.total = row, total


class Reducible(ChainError):
    def __init__(self, state):
        super().__init__(f"chain is reducible: state {state} cannot reach every other state")
        self.state = state


class WrongMode(MarkovError):
    pass


class NotLazy(MarkovError):
    pass


class NotReversible(MarkovError):
    pass


class BadDistribution(MarkovError):
    pass


class LengthMismatch(MarkovError):
    pass


class NegativeTime(MarkovError):
    pass


class BadTime(MarkovError):
    pass


class SolverFailure(MarkovError):
    pass


class EmptyTargetSet(MarkovError):
    pass


class BadAlpha(MarkovError):
    pass


class BadDelta(MarkovError):
    pass


class TooLargeForExact(MarkovError):
    pass


class ConstructionFailure(MarkovError):
    pass


class ChainMismatch(MarkovError):
    pass


class NotMixing(MarkovError):
    """Distance never dropped below the target within the search horizon."""


class UnknownFamily(MarkovError):
    pass


class BadSize(MarkovError):
    pass


class BadHorizon(MarkovError):
    pass


class BadSizes(MarkovError):
    pass
