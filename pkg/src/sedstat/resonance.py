"""Mean energy of a radiatively damped oscillator from the resonance integral.

The oscillator (mass m, charge e, frequency w) bathed in radiation of
spectral density rho has mean energy

    <eps> = (4 pi / 3) (e**2 / m) w**2
            * int_0^w_max rho(w') dw' / ((w'**2 - w**2)**2 + (g w'**3)**2)

with g = (2/3) e**2 / m (c = 1).  For tau = g w << 1 the integrand is a
spike of full width tau * w at w' = w and the integral collapses to the
narrow-resonance value pi**2 rho(w) / w**2, with an O(tau) correction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from sedstat import quadrature
from sedstat.errors import DomainError
from sedstat.spectra import SpectralDensity

TAU_MAX = 1e-2
TAU_WARN = 1e-3


@dataclass(frozen=True)
class OscillatorParams:
    """Charged oscillator; the damping ratio tau is derived, never set."""

    mass: float
    charge: float
    omega: float

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be > 0, got {self.mass}")
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        tau = self.tau
        if not tau > 0:
            raise DomainError("charge must be nonzero (tau = 0 means no coupling)")
        if not tau < TAU_MAX:
            raise DomainError(f"damping ratio tau = {tau:.3g} must be < {TAU_MAX}")
        if tau > TAU_WARN:
            warnings.warn(
                f"damping ratio tau = {tau:.3g} exceeds {TAU_WARN}; "
                "narrow-resonance corrections grow as O(tau)",
                stacklevel=3,
            )

    @classmethod
    def from_tau(cls, tau: float, omega: float = 1.0, mass: float = 1.0) -> "OscillatorParams":
        """Pick the charge that gives damping ratio ``tau``."""
        if not tau > 0:
            raise DomainError(f"tau must be > 0, got {tau}")
        return cls(mass, math.sqrt(1.5 * tau * mass / omega), omega)

    @property
    def coupling(self) -> float:
        """g = (2/3) e**2 / m."""
        return 2.0 * self.charge**2 / (3.0 * self.mass)

    @property
    def tau(self) -> float:
        return self.coupling * self.omega

    @property
    def gamma(self) -> float:
        """Linear damping rate g w**2 = tau * w; also the resonance full width."""
        return self.coupling * self.omega**2


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the two-region resonance quadrature.

    ``omega_max=None`` means 100 times the oscillator frequency.  The fine
    window spans ``wing_halfwidths`` resonance widths (tau * w) either side
    of the peak.
    """

    omega_max: float | None = None
    wing_halfwidths: float = 50.0
    rel_tol: float = 1e-10
    max_evals: int = 400_000

    def cutoff(self, omega: float) -> float:
        return 100.0 * omega if self.omega_max is None else self.omega_max

    def validate(self, omega: float):
        if not self.cutoff(omega) > omega:
            raise DomainError(f"omega_max = {self.cutoff(omega)} must exceed omega = {omega}")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if not self.wing_halfwidths > 0:
            raise DomainError("wing_halfwidths must be > 0")


@dataclass(frozen=True)
class ResonanceResult:
    value: float
    abs_error: float
    n_evals: int

    @property
    def rel_error(self) -> float:
        if self.value == 0:
            return 0.0 if self.abs_error == 0 else math.inf
        return self.abs_error / abs(self.value)


def integrand(params: OscillatorParams, density: SpectralDensity):
    """Vectorised integrand of the resonance integral, prefactor included."""
    w = params.omega
    g = params.coupling
    pref = 2.0 * math.pi * g * w * w  # (4 pi / 3)(e**2 / m) = 2 pi g

    def f(wp):
        wp = np.asarray(wp, dtype=float)
        detune = (wp - w) * (wp + w)
        width = g * wp**3
        return pref * np.asarray(density(wp), dtype=float) / (detune * detune + width * width)

    return f


def breakpoints(params: OscillatorParams, cfg: QuadratureConfig) -> list[float]:
    """Region edges: coarse wing, fine window split at the peak, coarse wing."""
    w = params.omega
    w_max = cfg.cutoff(w)
    half = cfg.wing_halfwidths * params.tau * w
    lo = max(w - half, 0.0)
    hi = min(w + half, w_max)
    pts = [0.0, lo, w, hi, w_max]
    return sorted(set(pts))


def mean_energy_integral(
    params: OscillatorParams,
    density: SpectralDensity,
    cfg: QuadratureConfig | None = None,
) -> ResonanceResult:
    """Evaluate the resonance integral for ``params`` driven by ``density``.

    Raises
    ------
    DomainError
        If the density is not defined on [0, omega_max].
    QuadratureBudgetError
        If ``cfg.max_evals`` is spent before ``cfg.rel_tol`` is reached.
    """
    cfg = cfg or QuadratureConfig()
    cfg.validate(params.omega)
    w_max = cfg.cutoff(params.omega)
    if not density.covers(0.0, w_max):
        lo, hi = density.support
        raise DomainError(f"density defined on [{lo}, {hi}] does not cover [0, {w_max}]")
    res = quadrature.integrate(
        integrand(params, density),
        breakpoints(params, cfg),
        rel_tol=cfg.rel_tol,
        max_evals=cfg.max_evals,
    )
    return ResonanceResult(res.value, res.abs_error, res.n_evals)


def narrow_resonance_value(params: OscillatorParams, density: SpectralDensity) -> float:
    """pi**2 rho(w) / w**2, the on-resonance approximation."""
    return density.mean_energy(params.omega)


def narrow_resonance_error(
    params: OscillatorParams,
    density: SpectralDensity,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Relative gap between the full integral and its narrow-resonance value.

    Scales as O(tau): the leading piece comes from the slowly decaying
    off-resonance wings, which grow logarithmically with omega_max for the
    zeropoint density.
    """
    approx = narrow_resonance_value(params, density)
    if approx == 0:
        raise DomainError("narrow-resonance value is zero; relative error undefined")
    full = mean_energy_integral(params, density, cfg).value
    return abs(full - approx) / approx
