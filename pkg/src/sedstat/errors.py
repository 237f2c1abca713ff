"""Exception types shared across the package."""


class DomainError(ValueError):
    """A physical or mathematical precondition was violated."""


class QuadratureBudgetError(RuntimeError):
    """Adaptive quadrature ran out of evaluations before reaching its tolerance."""

    def __init__(self, message, value, abs_error, n_evals):
        super().__init__(message)
        self.value = value
        self.abs_error = abs_error
        self.n_evals = n_evals


class IntegrationError(RuntimeError):
    """A time or temperature integration failed (blowup, step underflow)."""
