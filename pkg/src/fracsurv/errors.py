"""Exception hierarchy shared by every fracsurv module."""


class FracSurvError(Exception):
    """Base class for all library errors."""


class DomainError(FracSurvError, ValueError):
    """An argument lies outside the domain of the function."""


class InvalidParamsError(FracSurvError, ValueError):
    """Model parameters violate the distribution's invariants."""


class NoConvergenceError(FracSurvError, ArithmeticError):
    """An iterative numerical routine hit its iteration cap."""


class NoEventsError(FracSurvError, ValueError):
    """A dataset contains no observed events, so nothing can be fitted."""


class PrecisionLossError(NoConvergenceError):
    """Series cancellation would leave too few significant digits."""
