"""Exception hierarchy shared by the cvqkd modules."""


class CVQKDError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CVQKDError, ValueError):
    """An argument lies outside the domain of a formula."""


class PhysicalityError(DomainError):
    """A covariance matrix does not describe a physical Gaussian state."""


class PreconditionError(DomainError):
    """A formula was requested outside the regime it was derived for."""


class ConvergenceError(CVQKDError, RuntimeError):
    """An iterative solver did not converge."""


class CovarianceError(DomainError):
    """A sampling covariance matrix is not positive semidefinite."""


class DegenerateError(DomainError):
    """A moment estimator would divide by a vanishing variance."""
