"""Exception hierarchy shared by all modules."""


class EFresnelError(Exception):
    """Base class for every error raised by this package."""


class InvalidMatrix(EFresnelError, ValueError):
    pass


class InvalidParams(EFresnelError, ValueError):
    pass


class NumericPrecondition(EFresnelError, ValueError):
    """A transform was requested at a parameter where it degenerates."""


class SingularB(NumericPrecondition):
    pass


class SingularC(NumericPrecondition):
    pass


class DegenerateStrip(NumericPrecondition):
    pass


class DomainError(NumericPrecondition):
    pass


class ImaginaryResidue(EFresnelError, ArithmeticError):
    pass


class ExcessiveExtrapolation(EFresnelError, ArithmeticError):
    pass


class SizeCapExceeded(EFresnelError, ValueError):
    pass


class FormatError(EFresnelError, IOError):
    """Malformed CF64/WF64 file. ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
