"""Classical stochastic-electrodynamics toolkit.

Natural units throughout: hbar = c = k_B = 1, so frequencies, energies and
temperatures share one unit and rho(omega, T) scales as omega**3.
"""

from sedstat.errors import DomainError, IntegrationError, QuadratureBudgetError

__version__ = "0.1.0"

__all__ = ["DomainError", "IntegrationError", "QuadratureBudgetError", "__version__"]
