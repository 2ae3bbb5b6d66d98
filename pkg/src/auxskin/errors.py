"""Exception hierarchy shared by every module.

Each error carries the short name of the module that raised it so the CLI can
emit a one-line, prefixed message and pick an exit code.
"""


class AuxskinError(Exception):
    module = "auxskin"
    exit_code = 1


class ValidationError(AuxskinError, ValueError):
    exit_code = 2


class DomainError(ValidationError):
    """Argument outside the range where a formula is defined."""


class InvariantViolation(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
        self.line = line
        self.path = path


class NumericalError(AuxskinError, ArithmeticError):
    exit_code = 3


class NoConvergence(NumericalError):
    pass


class BracketFailure(NumericalError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateGeometry(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class InsufficientData(NumericalError):
    pass


class EmptyInput(ValidationError):
    pass


class NoUnlockedData(ValidationError):
    pass


class NoLockedData(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class VoltageOutOfRange(ValidationError):
    pass
