"""Spectral densities of zeropoint and thermal radiation, and mean oscillator energies.

All functions accept scalars or numpy arrays and use natural units
(hbar = c = k_B = 1).  In these units

    rho_0(w)    = w**3 / (2 pi**2)
    rho_T(w)    = w**3 / (pi**2 (exp(w/T) - 1))
    rho(w, T)   = rho_0 + rho_T = (w**3 / 2 pi**2) coth(w / 2T)
    <eps>(w, T) = (w/2) coth(w/2T) = pi**2 rho(w, T) / w**2
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from sedstat.errors import DomainError

#: Below this value of x = omega/T the Bose factor uses its Laurent series.
SMALL_X = 1e-5


@dataclass(frozen=True)
class ThermoState:
    """An (omega, T) pair with the Wien variable x = omega/T."""

    omega: float
    temperature: float

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def x(self) -> float:
        if self.temperature == 0:
            return math.inf
        return self.omega / self.temperature

    @classmethod
    def from_ratio(cls, x: float, omega: float = 1.0) -> "ThermoState":
        """Build a state from x = omega/T (x = inf means T = 0)."""
        if not x > 0:
            raise DomainError(f"x = omega/T must be > 0, got {x}")
        return cls(omega, 0.0 if math.isinf(x) else omega / x)


def _check_omega(omega, strict=False):
    w = np.asarray(omega, dtype=float)
    bad = (w <= 0) if strict else (w < 0)
    if np.any(bad) or np.any(np.isnan(w)):
        raise DomainError(f"omega must be {'> 0' if strict else '>= 0'}, got {omega}")
    return w


def _check_temperature(temperature):
    t = np.asarray(temperature, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    return t


def _unwrap(a):
    return a.item() if a.ndim == 0 else a


def bose_energy(omega, temperature):
    """omega / (exp(omega/T) - 1), i.e. the thermal energy per mode.

    Zero at T = 0.  For x = omega/T < SMALL_X the series
    T (1 - x/2 + x**2/12) replaces the exponential.
    """
    w = _check_omega(omega)
    t = _check_temperature(temperature)
    w, t = np.broadcast_arrays(w, t)
    out = np.zeros(w.shape)
    hot = t > 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        x = np.where(hot, w / np.where(hot, t, 1.0), np.inf)
        small = hot & (x < SMALL_X)
        regular = hot & ~small & (w > 0)
        out[regular] = w[regular] / np.expm1(x[regular])
        xs = x[small]
        out[small] = t[small] * (1.0 - xs / 2.0 + xs * xs / 12.0)
    return _unwrap(out)


def rho_zeropoint(omega):
    """Zeropoint spectral density omega**3 / (2 pi**2)."""
    w = _check_omega(omega)
    return _unwrap(w**3 / (2.0 * math.pi**2))


def rho_thermal(omega, temperature):
    """Thermal (blackbody) spectral density without the zeropoint part."""
    w = _check_omega(omega)
    return _unwrap(np.asarray(w**2 * bose_energy(w, temperature)) / math.pi**2)


def rho_total(omega, temperature):
    """Zeropoint plus thermal density, (omega**3 / 2 pi**2) coth(omega / 2T)."""
    w = _check_omega(omega)
    return _unwrap(np.asarray(w**2 * (w / 2.0 + bose_energy(w, temperature))) / math.pi**2)


def mean_energy(omega, temperature):
    """Mean oscillator energy (omega/2) coth(omega/2T); omega/2 at T = 0."""
    w = _check_omega(omega, strict=True)
    return _unwrap(np.asarray(w / 2.0 + bose_energy(w, temperature)))


def mean_thermal_energy(omega, temperature):
    """Thermal part of the mean energy, omega / (exp(omega/T) - 1)."""
    _check_omega(omega, strict=True)
    return bose_energy(omega, temperature)


class DensityKind(enum.Enum):
    ZEROPOINT = "zeropoint"
    THERMAL = "thermal"
    TOTAL = "total"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class SpectralDensity:
    """A spectral density rho(omega) that can be evaluated pointwise.

    Use the constructors :meth:`zeropoint`, :meth:`thermal`, :meth:`total`
    and :meth:`tabulated` rather than building instances directly.
    Tabulated densities interpolate linearly and are only defined on their
    grid; evaluating outside it raises :class:`DomainError`.
    """

    kind: DensityKind
    temperature: float = 0.0
    grid: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def zeropoint(cls) -> "SpectralDensity":
        return cls(DensityKind.ZEROPOINT)

    @classmethod
    def thermal(cls, temperature: float) -> "SpectralDensity":
        _check_temperature(temperature)
        return cls(DensityKind.THERMAL, float(temperature))

    @classmethod
    def total(cls, temperature: float) -> "SpectralDensity":
        _check_temperature(temperature)
        return cls(DensityKind.TOTAL, float(temperature))

    @classmethod
    def tabulated(cls, omegas, rhos) -> "SpectralDensity":
        grid = np.array(omegas, dtype=float)
        values = np.array(rhos, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise DomainError("tabulated density needs matching 1-D grids of length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("tabulated omega grid must be strictly increasing")
        if grid[0] < 0 or np.any(values < 0) or not np.all(np.isfinite(values)):
            raise DomainError("tabulated density needs omega >= 0 and finite rho >= 0")
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls(DensityKind.TABULATED, grid=grid, values=values)

    @classmethod
    def constant(cls, level: float, omega_max: float) -> "SpectralDensity":
        """Flat density on [0, omega_max]."""
        return cls.tabulated([0.0, omega_max], [level, level])

    @property
    def support(self) -> tuple[float, float]:
        """Closed interval on which the density is defined."""
        if self.kind is DensityKind.TABULATED:
            return float(self.grid[0]), float(self.grid[-1])
        return 0.0, math.inf

    def covers(self, lo: float, hi: float) -> bool:
        a, b = self.support
        return a <= lo and hi <= b

    def __call__(self, omega):
        if self.kind is DensityKind.ZEROPOINT:
            return rho_zeropoint(omega)
        if self.kind is DensityKind.THERMAL:
            return rho_thermal(omega, self.temperature)
        if self.kind is DensityKind.TOTAL:
            return rho_total(omega, self.temperature)
        w = _check_omega(omega)
        lo, hi = self.support
        if np.any(w < lo) or np.any(w > hi):
            raise DomainError(f"tabulated density is only defined on [{lo}, {hi}]")
        return _unwrap(np.interp(w, self.grid, self.values))

    def mean_energy(self, omega: float) -> float:
        """On-resonance oscillator energy pi**2 rho(omega) / omega**2."""
        return math.pi**2 * float(self(omega)) / omega**2
