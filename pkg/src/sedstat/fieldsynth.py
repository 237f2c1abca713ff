"""Random-phase synthesis of classical stochastic electric fields.

A realization is a sum of plane-wave modes on an equally spaced midpoint
grid w_k = (k + 1/2) dw, dw = omega_max / n_modes::

    E_j(t) = sum_k A_k cos(w_k t + phi_kj),   j = x, y, z
    A_k    = sqrt(8 pi rho(w_k) dw / 3)

Phases are i.i.d. uniform, amplitudes are deterministic.  Averaging over
phases gives <E(t).E(0)> / 4pi = sum_k rho(w_k) dw cos(w_k t), the midpoint
rule for the cosine transform of rho.  The field is Gaussian only in the
many-mode limit; for K equal-weight modes the excess kurtosis of E_x is
about -1.5/K.

The module also draws the random absorption weights alpha_i used by the
counting code, either flat on the simplex or proportional to the local
field energy |E_i|**2.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.fft

from sedstat import parallel
from sedstat.errors import DomainError
from sedstat.spectra import SpectralDensity


@dataclass(frozen=True)
class FieldModeTable:
    """One field realization: mode frequencies, amplitudes and phases."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray = field(repr=False)  # shape (n_modes, 3)
    spacing: float
    seed: object = None

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def period(self) -> float:
        """Midpoint grids repeat after 4 pi / dw."""
        return 4.0 * math.pi / self.spacing

    @property
    def coefficients(self) -> np.ndarray:
        """Complex mode amplitudes A_k exp(i phi_kj), shape (3, n_modes)."""
        return (self.amplitudes[:, None] * np.exp(1j * self.phases)).T

    def mean_square(self) -> float:
        """Phase-averaged <E.E> / 4pi, i.e. the integral of rho over the grid."""
        return 1.5 * float(np.sum(self.amplitudes**2)) / (4.0 * math.pi)

    def field(self, t) -> np.ndarray:
        """E(t) by direct summation, shape (len(t), 3)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        phase = np.exp(1j * np.outer(t, self.frequencies))
        return (phase @ self.coefficients.T).real

    def sample_period(self, n_samples: int, components=(0, 1, 2)) -> tuple[np.ndarray, np.ndarray]:
        """Sample one full period on a uniform grid by inverse FFT.

        Returns ``(t, E)`` with ``E`` of shape (n_samples, len(components)).
        Mode k sits on FFT bin 2k + 1, so ``n_samples`` must exceed
        ``4 * n_modes + 2``.
        """
        m = int(n_samples)
        if m <= 4 * self.n_modes + 2:
            raise DomainError(
                f"need more than {4 * self.n_modes + 2} samples per period, got {m}"
            )
        t = np.arange(m) * (self.period / m)
        coef = self.coefficients
        out = np.empty((m, len(components)))
        spec = np.zeros(m // 2 + 1, dtype=complex)
        for col, j in enumerate(components):
            spec[1 : 2 * self.n_modes : 2] = 0.5 * m * coef[j]
            out[:, col] = scipy.fft.irfft(spec, m)
        return t, out


def mode_grid(omega_max: float, n_modes: int) -> tuple[np.ndarray, float]:
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    if not omega_max > 0:
        raise DomainError(f"omega_max must be > 0, got {omega_max}")
    dw = omega_max / n_modes
    return (np.arange(n_modes) + 0.5) * dw, dw


def mode_amplitudes(density: SpectralDensity, omega_max: float, n_modes: int):
    freqs, dw = mode_grid(omega_max, n_modes)
    rho = np.asarray(density(freqs), dtype=float)
    if np.any(rho < 0):
        raise DomainError("spectral density must be non-negative on the mode grid")
    return freqs, np.sqrt(8.0 * math.pi * rho * dw / 3.0), dw


def synthesize(density: SpectralDensity, omega_max: float, n_modes: int, seed) -> FieldModeTable:
    """Draw one realization of a field with spectral density ``density``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; the same
    seed gives a bit-identical table.
    """
    if n_modes < 2:
        raise DomainError(f"n_modes must be >= 2, got {n_modes}")
    freqs, amps, dw = mode_amplitudes(density, omega_max, n_modes)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(n_modes, 3))
    return FieldModeTable(freqs, amps, phases, dw, seed)


def ensemble(density: SpectralDensity, omega_max: float, n_modes: int, n_realizations: int, seed: int):
    """Lazily yield realizations seeded from (seed, index)."""
    freqs, amps, dw = mode_amplitudes(density, omega_max, n_modes)
    for i in range(n_realizations):
        ss = parallel.realization_seed(seed, i)
        phases = np.random.default_rng(ss).uniform(0.0, 2.0 * math.pi, size=(n_modes, 3))
        yield FieldModeTable(freqs, amps, phases, dw, ss)


def correlation_oracle(density: SpectralDensity, omega_max: float, t, rel_tol=1e-10) -> np.ndarray:
    """int_0^omega_max rho(w) cos(w t) dw by adaptive quadrature, per t."""
    from scipy.integrate import quad

    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti == 0:
            out[i] = quad(lambda w: float(density(w)), 0.0, omega_max, epsrel=rel_tol, limit=500)[0]
        else:
            out[i] = quad(
                lambda w: float(density(w)),
                0.0,
                omega_max,
                weight="cos",
                wvar=ti,
                epsrel=rel_tol,
                limit=500,
            )[0]
    return out


@dataclass(frozen=True)
class CorrelationEstimate:
    t: np.ndarray
    correlation: np.ndarray
    stderr: np.ndarray
    mean_field: np.ndarray  # per t and component, shape (len(t), 3)
    mean_field_stderr: np.ndarray
    n_realizations: int


def _chunks(tables, size):
    buf = []
    for tab in tables:
        buf.append(tab)
        if len(buf) == size:
            yield buf
            buf = []
    if buf:
        yield buf


def correlation_empirical(
    tables: Iterable[FieldModeTable], t, chunk_size: int = 256, min_realizations: int = 100
) -> CorrelationEstimate:
    """Ensemble estimate of <E(t).E(0)> / 4pi with per-t standard errors.

    ``tables`` may be any iterable (e.g. :func:`ensemble`), consumed in
    chunks; all tables in a chunk must share one mode grid.  Partial sums
    are combined with a fixed pairwise tree, so the result does not depend
    on how the iterable was produced.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    parts = []
    n = 0
    for chunk in _chunks(tables, chunk_size):
        freqs = chunk[0].frequencies
        if any(c.frequencies is not freqs and not np.array_equal(c.frequencies, freqs) for c in chunk):
            raise DomainError("all realizations in a chunk must share one mode grid")
        coef = np.stack([c.coefficients for c in chunk])  # (R, 3, K)
        phase = np.exp(1j * np.outer(freqs, t))  # (K, T)
        e_t = (coef @ phase).real  # (R, 3, T)
        e_0 = coef.sum(axis=2).real  # (R, 3)
        prod = np.einsum("rjt,rj->rt", e_t, e_0) / (4.0 * math.pi)
        parts.append(
            np.concatenate(
                [
                    prod.sum(axis=0),
                    (prod**2).sum(axis=0),
                    e_t.sum(axis=0).T.ravel(),
                    (e_t**2).sum(axis=0).T.ravel(),
                ]
            )
        )
        n += len(chunk)
    if n == 0:
        raise DomainError("empty ensemble")
    if n < min_realizations:
        raise DomainError(f"need at least {min_realizations} realizations, got {n}")
    tot = parallel.pairwise_sum(parts)
    nt = t.size
    s1, s2 = tot[:nt], tot[nt : 2 * nt]
    f1 = tot[2 * nt : 5 * nt].reshape(nt, 3)
    f2 = tot[5 * nt :].reshape(nt, 3)
    mean = s1 / n
    var = np.maximum(s2 / n - mean**2, 0.0) * n / (n - 1)
    fmean = f1 / n
    fvar = np.maximum(f2 / n - fmean**2, 0.0) * n / (n - 1)
    return CorrelationEstimate(t, mean, np.sqrt(var / n), fmean, np.sqrt(fvar / n), n)


def periodogram(tables: Iterable[FieldModeTable], samples_per_period: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Recover rho on the mode grid from the power spectrum of sampled trajectories.

    Each realization is sampled over one period, Fourier transformed, and
    the one-sided power in every mode cell is divided by the cell width.
    Returns ``(frequencies, rho_estimate)`` averaged over the ensemble.
    """
    acc = []
    freqs = None
    for tab in tables:
        m = samples_per_period or scipy.fft.next_fast_len(8 * tab.n_modes + 8, real=True)
        _, e = tab.sample_period(m)
        spec = scipy.fft.rfft(e, axis=0)
        power = (2.0 * np.abs(spec) ** 2 / m**2).sum(axis=1) / (4.0 * math.pi)
        # bins 2k and 2k+1 form mode cell k; bin width is dw / 2
        cells = power[: 2 * tab.n_modes].reshape(tab.n_modes, 2).sum(axis=1)
        acc.append(cells / tab.spacing)
        freqs = tab.frequencies
    if not acc:
        raise DomainError("empty ensemble")
    return freqs, parallel.pairwise_sum(acc) / len(acc)


def write_trajectory_csv(stream, t, e) -> None:
    """Write columns t, Ex, Ey, Ez with 17 significant digits."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "Ex", "Ey", "Ez"])
    for ti, row in zip(t, e):
        w.writerow([f"{ti:.17g}"] + [f"{v:.17g}" for v in row])


class WeightMode(enum.Enum):
    FLAT_SIMPLEX = "flat"
    FIELD_ENERGY = "field"


@dataclass(frozen=True)
class WeightVector:
    """Absorption weights alpha_i in [0, 1] summing to one."""

    alphas: np.ndarray
    mode: WeightMode

    def __post_init__(self):
        a = self.alphas
        if np.any(a < 0) or np.any(a > 1) or abs(math.fsum(a) - 1.0) > 1e-12:
            raise DomainError("weights must lie in [0, 1] and sum to 1")


def weight_batch(n_sites: int, size: int, mode: WeightMode, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` weight vectors at once, shape (size, n_sites).

    FLAT_SIMPLEX normalises standard exponentials (Dirichlet(1, ..., 1)).
    FIELD_ENERGY normalises |E_i|**2 for independent unit 3-D Gaussians,
    which is Dirichlet(3/2, ..., 3/2); the field scale cancels.
    """
    if n_sites < 1:
        raise DomainError(f"need at least one site, got {n_sites}")
    mode = WeightMode(mode)
    if mode is WeightMode.FLAT_SIMPLEX:
        raw = rng.standard_exponential((size, n_sites))
    else:
        g = rng.standard_normal((size, n_sites, 3))
        raw = np.einsum("snj,snj->sn", g, g)
    return raw / raw.sum(axis=1, keepdims=True)


def sample_weights(n_sites: int, mode=WeightMode.FLAT_SIMPLEX, density: SpectralDensity | None = None, seed=None) -> WeightVector:
    """One random weight vector over ``n_sites`` oscillators.

    ``density`` is accepted for interface symmetry but unused: only
    proportionality to the local energy density matters once the weights
    are normalised.
    """
    mode = WeightMode(mode)
    rng = np.random.default_rng(seed)
    return WeightVector(weight_batch(n_sites, 1, mode, rng)[0], mode)
