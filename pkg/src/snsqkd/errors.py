"""Exception hierarchy shared by all modules."""


class SNSError(Exception):
    """Base class for errors raised by snsqkd."""


class DomainError(SNSError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericError(SNSError, ArithmeticError):
    """A series failed to converge within its policy limits."""


class ValidityError(SNSError, ValueError):
    """Decoy bounds are not valid for the given intensities or observations."""


class TruncationError(SNSError, ValueError):
    """A truncated Fock-basis state carries too much weight beyond its cutoff."""
