"""The energy-fluctuation law of a field-driven oscillator and its solution.

With thermal and zeropoint fluctuations adding independently, the energy
variance obeys

    <eps>**2 = T**2 d<eps>/dT + (w/2)**2          (k_B = 1)

i.e. the ODE d<eps>/dT = (<eps>**2 - (w/2)**2) / T**2.  Its solution with
<eps> -> w/2 as T -> 0 is (w/2) coth(w/2T).  Other initial values give a
different member of the family (eps - w/2)/(eps + w/2) = K exp(-w/T):
K > 1 blows up at finite T, K < 0 never exceeds w/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from sedstat import spectra
from sedstat.errors import DomainError, IntegrationError


def mean_energy_derivative(omega, temperature):
    """d/dT of (w/2) coth(w/2T), equal to (w/2T)**2 / sinh(w/2T)**2."""
    w = np.asarray(omega, dtype=float)
    t = np.asarray(temperature, dtype=float)
    if np.any(t <= 0):
        raise DomainError("temperature must be > 0")
    y = w / (2.0 * t)
    with np.errstate(over="ignore"):
        s = np.sinh(y)
        out = (y / s) ** 2
    return out.item() if out.ndim == 0 else out


def variance_residual(omega: float, temperature: float, derivative: str = "exact") -> float:
    """Relative residual of the fluctuation law for the coth solution.

    ``derivative="exact"`` uses the closed-form dT derivative;
    ``"central"`` uses a central difference with step 1e-5 * T.
    """
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    eps = spectra.mean_energy(omega, temperature)
    if derivative == "exact":
        deps = mean_energy_derivative(omega, temperature)
    elif derivative == "central":
        h = 1e-5 * temperature
        deps = (spectra.mean_energy(omega, temperature + h) - spectra.mean_energy(omega, temperature - h)) / (2 * h)
    else:
        raise ValueError(f"unknown derivative mode {derivative!r}")
    rhs = temperature**2 * deps + (omega / 2) ** 2
    return abs(eps**2 - rhs) / eps**2


@dataclass(frozen=True)
class OdeSolveConfig:
    t_start: float
    t_end: float
    initial_energy: float
    rtol: float = 1e-11
    n_output: int = 50
    # thermal excess initial_energy - w/2 given directly, to avoid cancellation
    initial_thermal: float | None = None

    def validate(self, omega: float):
        if not 0 < self.t_start < self.t_end:
            raise DomainError(f"need 0 < t_start < t_end, got {self.t_start}, {self.t_end}")
        if self.initial_energy < omega / 2 or (self.initial_thermal or 0.0) < 0:
            raise DomainError(
                f"initial energy {self.initial_energy} is below the zeropoint value {omega / 2}"
            )
        if not self.rtol > 0:
            raise DomainError("rtol must be > 0")

    @classmethod
    def from_low_temperature(
        cls, omega: float, t_start: float, t_end: float, asymptotic: bool = False, **kw
    ) -> "OdeSolveConfig":
        """Start on the physical branch at ``t_start``.

        The initial thermal energy is w / (exp(w/T) - 1), or its small-T
        form w exp(-w/T) when ``asymptotic`` is set; the two differ by a
        relative exp(-w/T).
        """
        if asymptotic:
            u0 = omega * math.exp(-omega / t_start)
        else:
            u0 = spectra.mean_thermal_energy(omega, t_start)
        return cls(t_start, t_end, omega / 2 + u0, initial_thermal=u0, **kw)

    def thermal_start(self, omega: float) -> float:
        if self.initial_thermal is not None:
            return self.initial_thermal
        return self.initial_energy - omega / 2


@dataclass(frozen=True)
class OdeSolution:
    temperature: np.ndarray
    mean_energy: np.ndarray
    error_estimate: np.ndarray  # |fine - coarse| at each output temperature
    n_evals: int


def _integrate(omega, cfg: OdeSolveConfig, rtol, t_eval):
    # state is log of the thermal excess u = eps - w/2: d(log u)/dT = (u + w) / T**2
    y0 = math.log(cfg.thermal_start(omega))

    def rhs(t, y):
        with np.errstate(over="ignore"):
            return (np.exp(y) + omega) / (t * t)

    def blowup(t, y):
        return y[0] - 700.0

    blowup.terminal = True
    sol = solve_ivp(
        rhs,
        (cfg.t_start, cfg.t_end),
        [y0],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-3,
        t_eval=t_eval,
        events=blowup,
    )
    if sol.status == 1:
        raise IntegrationError(
            f"solution diverges at T = {sol.t_events[0][0]:.6g}: "
            "the initial value is off the branch selected by eps -> w/2 as T -> 0"
        )
    if sol.status != 0:
        raise IntegrationError(f"step size underflow near T = {sol.t[-1]:.6g}: {sol.message}")
    return omega / 2 + np.exp(sol.y[0]), sol.nfev


def solve_mean_energy(omega: float, cfg: OdeSolveConfig) -> OdeSolution:
    """Integrate the fluctuation ODE upward in temperature from ``cfg.t_start``.

    The integration runs twice (``rtol`` and ``rtol / 32``); the finer run is
    returned and the difference is its error estimate.  An initial value of
    exactly w/2 is the fixed point and returns a constant solution.
    """
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega}")
    cfg.validate(omega)
    temps = np.linspace(cfg.t_start, cfg.t_end, cfg.n_output)
    if cfg.thermal_start(omega) == 0:
        flat = np.full(temps.shape, omega / 2)
        return OdeSolution(temps, flat, np.zeros_like(temps), 0)
    coarse, n1 = _integrate(omega, cfg, cfg.rtol, temps)
    fine, n2 = _integrate(omega, cfg, cfg.rtol / 32, temps)
    err = np.abs(fine - coarse)
    # floor at a few ulps so the estimate is never exactly zero
    err = np.maximum(err, 4 * np.finfo(float).eps * np.abs(fine))
    return OdeSolution(temps, fine, err, n1 + n2)


def ode_rhs(omega: float, temperature: float, energy: float) -> float:
    """d<eps>/dT = (<eps>**2 - (w/2)**2) / T**2."""
    half = omega / 2
    return (energy - half) * (energy + half) / temperature**2
