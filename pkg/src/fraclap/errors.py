"""Exception and warning types shared across the package."""


class FracLapError(Exception):
    """Base class for all package errors."""


class DomainError(FracLapError, ValueError):
    """An argument lies outside the range where a quantity is defined."""


class ExpressionError(FracLapError):
    """Base class for expression parsing and evaluation problems.

    ``offset`` is the byte offset into the source text, or ``None``.
    """

    def __init__(self, message, offset=None, source=None):
        self.offset = offset
        self.source = source
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"{message}{where}")
        self.message = message


class ParseError(ExpressionError):
    pass


class UnknownIdentifierError(ParseError):
    pass


class VariableIndexError(ParseError):
    pass


class EvaluationDomainError(ExpressionError):
    """Evaluation hit ln of a nonpositive number, a zero divisor, etc."""


class SingularSystemError(FracLapError):
    """The linearized operator is singular to working precision."""


class ConvergenceError(FracLapError):
    """Newton iteration failed; ``report`` carries the full history."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ProblemFileError(FracLapError):
    """A problem file is missing fields or holds wrong types."""


class FracLapWarning(UserWarning):
    """Soft failures that must end up in the solve report."""
