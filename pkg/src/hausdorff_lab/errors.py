"""Exception hierarchy shared by every module."""


class HausdorffLabError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(HausdorffLabError, ValueError):
    """Input data or configuration violates a documented invariant."""


class ParseError(ValidationError):
    """Kernel expression could not be parsed.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalDomainError(HausdorffLabError, ArithmeticError):
    """An expression was evaluated outside the domain of one of its parts."""

    def __init__(self, message, subexpression):
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


class NumericalError(HausdorffLabError, RuntimeError):
    """A computation produced non-finite values or failed to converge."""
