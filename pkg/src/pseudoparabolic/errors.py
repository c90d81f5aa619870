"""Exception hierarchy shared by the solver, the problem registry and the CLI."""


class PseudoParabolicError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PseudoParabolicError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigurationError(PseudoParabolicError, ValueError):
    """A problem definition or configuration file is malformed."""


class ConvergenceError(PseudoParabolicError, RuntimeError):
    """An iterative procedure stopped before meeting its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SingularMatrixError(PseudoParabolicError, ArithmeticError):
    """A linear system could not be factorized.

    ``code`` tells apart the failure sites: ``"K"`` for a dense solve,
    ``"K11"`` for the leading block and ``"schur"`` for the Schur complement.
    """

    def __init__(self, message, code="K", condition=None):
        super().__init__(message)
        self.code = code
        self.condition = condition


class ValidityError(DomainError):
    """Parameters violate the existence condition of a closed-form solution."""
