"""Exception types raised across the package."""


class GinarError(Exception):
    """Base class for package errors."""


class InvalidParameterError(GinarError, ValueError):
    pass


class InvalidModelError(GinarError, ValueError):
    pass


class InvalidSeriesError(GinarError, ValueError):
    pass


class DomainError(GinarError, ValueError):
    """Argument outside the region where a function is defined."""


class UnsupportedMethodError(GinarError, ValueError):
    pass


class NumericalError(GinarError, ArithmeticError):
    """Singular systems, failed solves and similar numerical breakdowns."""
