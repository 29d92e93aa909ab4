"""Exception types raised across the package."""


class InfostabError(Exception):
    """Base class for all package errors."""


class DomainViolation(InfostabError, ValueError):
    """A coordinate or argument lies outside the domain an operation requires."""


class EmptyGrid(InfostabError, ValueError):
    """A grid specification admits no lattice point."""


class SingularDesign(InfostabError, ArithmeticError):
    """The least-squares design matrix is numerically rank deficient."""


class SlopeUndefined(InfostabError, ArithmeticError):
    """A log-log slope cannot be fitted (zero or non-finite ordinates)."""


class BudgetViolation(InfostabError, ValueError):
    """An injected perturbation exceeds its declared epsilon budget."""
