"""Exception hierarchy shared by all pwlopt modules."""


class PwlOptError(Exception):
    pass


class InvalidArgument(PwlOptError, ValueError):
    pass


class DomainError(PwlOptError, ValueError):
    """An argument lies outside the domain of a function oracle."""


class PreconditionViolation(PwlOptError, ValueError):
    pass


class InfeasibleInstance(PwlOptError):
    pass


class UndefinedGap(PwlOptError, ZeroDivisionError):
    pass


class SizeCapExceeded(PwlOptError):
    """A brute-force oracle was asked to enumerate beyond its cap."""
