"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration/domain problems exit
with 2, resource-bound violations with 3.
"""


class GkpsimError(Exception):
    """Base class for all package errors."""


class DomainError(GkpsimError, ValueError):
    """A parameter is outside its mathematically valid range."""


class ResourceError(GkpsimError, RuntimeError):
    """A request exceeds a hard enumeration/memory bound."""


class DegeneratePosteriorError(GkpsimError, ArithmeticError):
    """An estimator is undefined for this posterior (e.g. flat prior)."""
