"""Exception hierarchy shared by all jetsym modules."""


class JetsymError(Exception):
    """Base class for every error raised by jetsym."""


class DenominatorZero(JetsymError, ZeroDivisionError):
    pass


class MissingVariable(JetsymError, KeyError):
    pass


class JetOrderError(JetsymError, ValueError):
    """A total derivative was requested on an expression that already has jets."""


class ParseError(JetsymError, ValueError):
    def __init__(self, message, line=None, column=None, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        where = f" at line {line}, column {column}" if line is not None else ""
        hint = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message}{where}{hint}")


class NotSolvable(JetsymError, ValueError):
    pass


class CircularSolvedForm(JetsymError, ValueError):
    pass


class UnknownName(JetsymError, KeyError):
    pass


class ModeUnavailable(JetsymError, ValueError):
    pass


class VerificationFailed(JetsymError, AssertionError):
    pass


class DegreeOverflow(JetsymError, ValueError):
    pass


class GuardViolated(JetsymError, ArithmeticError):
    def __init__(self, message, theta=None):
        self.theta = theta
        super().__init__(message)


class SingularLocus(JetsymError, ArithmeticError):
    pass


class NonFinite(JetsymError, ArithmeticError):
    pass


class ResourceLimit(JetsymError, RuntimeError):
    pass
