"""Exception hierarchy shared by all modules."""


class ToolkitError(Exception):
    """Base class."""


class InvalidInput(ToolkitError):
    """Malformed or inadmissible input data (CLI exit code 2)."""


class PreconditionError(ToolkitError):
    """An operation's precondition does not hold (CLI exit code 3)."""


class NotDivisible(PreconditionError):
    pass


class NotSubgroup(PreconditionError):
    pass


class NotNormal(PreconditionError):
    pass


class NotCyclic(PreconditionError):
    pass


class NotIndexP(PreconditionError):
    pass


class NotAUnit(PreconditionError):
    pass


class NotInIdeal(PreconditionError):
    pass


class M3aViolation(PreconditionError):
    def __init__(self, message, subgroup=None):
        super().__init__(message)
        self.subgroup = subgroup


class PrecisionExhausted(PreconditionError):
    pass


class WindowOverflow(PreconditionError):
    pass


class IntegralityViolation(ToolkitError):
    """A value that must be integral came out with a denominator."""


class H3Violation(ToolkitError):
    pass
