"""Exception types raised across the package."""


class SqWelfareError(Exception):
    """Base class for all package errors."""


class EmptySample(SqWelfareError, ValueError):
    pass


class NonFiniteValue(SqWelfareError, ValueError):
    pass


class NonPositiveWeight(SqWelfareError, ValueError):
    pass


class LengthMismatch(SqWelfareError, ValueError):
    pass


class UnsortedLevels(SqWelfareError, ValueError):
    pass


class InvalidLevel(SqWelfareError, ValueError):
    """A beta outside (0, 1] or an alpha outside [0, 1)."""


class LpNumericalFailure(SqWelfareError, ArithmeticError):
    """The simplex path failed or disagrees with the breakpoint path."""


class InvalidCovariate(SqWelfareError, IndexError):
    pass


class GroupMismatch(SqWelfareError, ValueError):
    pass


class InvalidSlackBound(SqWelfareError, ValueError):
    """A supplied slack constant is violated by the simulated draws."""


class QuadratureFailure(SqWelfareError, ArithmeticError):
    pass


class InvalidScenario(SqWelfareError, ValueError):
    pass


class NoTreatedDraws(SqWelfareError, ValueError):
    pass


class EmptyTreatedCell(UserWarning):
    """Emitted (not raised) when a covariate cell has no treated draws."""


class MissingFile(SqWelfareError, FileNotFoundError):
    pass


class BadHeader(SqWelfareError, ValueError):
    pass


class DuplicateGroupId(SqWelfareError, ValueError):
    pass


class BadConfig(SqWelfareError, ValueError):
    pass
