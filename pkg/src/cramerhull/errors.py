"""Exception taxonomy shared by all modules."""


class CramerHullError(Exception):
    """Base class for all toolkit errors."""


class DomainError(CramerHullError):
    """An argument lies outside the mathematical domain of the operation."""


class AtomicMeasureError(CramerHullError):
    """A density was requested from a purely atomic measure."""


class QuadratureFailure(CramerHullError):
    """Adaptive quadrature could not meet the requested tolerance."""


class ConvergenceFailure(CramerHullError):
    """An iterative solver exhausted its iteration budget."""


class NumericalInstability(CramerHullError):
    """A computed certificate failed re-verification."""


class BudgetExceeded(CramerHullError):
    """Estimated work for a simulation exceeds the configured operation cap."""


class RejectionTooSlow(CramerHullError):
    """Rejection sampling acceptance rate fell below the usable floor."""


class NotApplicable(CramerHullError):
    """A theoretical bound's preconditions are not met at these parameters."""
