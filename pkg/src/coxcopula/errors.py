"""Exception and warning types raised across the package."""


class CoxCopulaError(Exception):
    """Base class for package errors."""


class DomainError(CoxCopulaError, ValueError):
    """A parameter or argument lies outside the admissible domain."""


class InputError(CoxCopulaError, ValueError):
    """Malformed input data (NaN, wrong shape, too few observations)."""


class ValidityError(CoxCopulaError, ValueError):
    """An object fails a structural validity check (generator, Pickands function)."""


class TransitionDomainError(ValidityError):
    """A transition between covariate levels produced an invalid dependence function."""


class NumericError(CoxCopulaError, ArithmeticError):
    """A numerical routine failed to converge."""


class EstimationError(CoxCopulaError, RuntimeError):
    """An estimator cannot produce a usable value."""


class DivergenceError(EstimationError):
    """A plug-in estimator diverges at the supplied input."""


class DomainWarning(UserWarning):
    """An estimate falls outside the family's parameter domain."""


class PropagationWarning(UserWarning):
    """A propagated copula failed a validity check."""
