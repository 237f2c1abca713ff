"""Time-domain Langevin simulation of a charged oscillator in a random field.

Each realization integrates

    x'' + gamma x' + w**2 x = (e/m) E_x(t),   gamma = (2/3)(e**2/m) w**2

with E_x from :mod:`sedstat.fieldsynth`.  Linear damping stands in for the
third-derivative radiation reaction, which is exact to O(tau), the same
order as the narrow-resonance approximation.  Only E_x drives the 1-D
oscillator; the 4 pi / 3 in the resonance integral is that one-third share
of the isotropic field.

The integrator is the centred leapfrog

    (1 + h) x[n+1] = (2 - (w dt)**2) x[n] - (1 - h) x[n-1] + dt**2 f[n],
    h = gamma dt / 2,   v[n] = (x[n+1] - x[n-1]) / (2 dt)

which is a linear recurrence, so it runs through :func:`scipy.signal.lfilter`.
The drive is sampled by inverse FFT over whole field periods, so the time
step is rounded down to divide the period evenly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.signal import lfilter

from sedstat import fieldsynth, parallel
from sedstat.errors import DomainError, IntegrationError
from sedstat.resonance import OscillatorParams
from sedstat.spectra import SpectralDensity

BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class SimConfig:
    """Ensemble settings.  ``None`` fields take documented defaults.

    dt            0.045 / w (must satisfy dt * w < 0.05)
    t_relax       8 / gamma (must be >= 5 / gamma)
    t_measure     one field period minus t_relax
    field_omega_max   2 w, cutoff of the synthesized drive
    mode_spacing  gamma / 20; finer spacing makes the drive more Gaussian
                  (the energy variance is biased low by about
                  mode_spacing / (pi gamma))
    """

    params: OscillatorParams
    n_realizations: int = 200
    seed: int = 0
    dt: float | None = None
    t_relax: float | None = None
    t_measure: float | None = None
    field_omega_max: float | None = None
    mode_spacing: float | None = None

    def __post_init__(self):
        w, g = self.params.omega, self.params.gamma
        if not self.time_step * w < 0.05:
            raise DomainError(f"dt * omega = {self.time_step * w:.3g} must be < 0.05")
        if not self.relax_time >= 5.0 / g * (1 - 1e-12):
            raise DomainError(f"t_relax = {self.relax_time:.6g} must be >= 5/gamma = {5 / g:.6g}")
        if self.n_realizations < 1:
            raise DomainError("n_realizations must be >= 1")
        if not self.cutoff > w:
            raise DomainError("field_omega_max must exceed omega")
        if not self.measure_time > 0:
            raise DomainError("t_measure must be > 0")

    @property
    def time_step(self) -> float:
        return 0.045 / self.params.omega if self.dt is None else self.dt

    @property
    def relax_time(self) -> float:
        return 8.0 / self.params.gamma if self.t_relax is None else self.t_relax

    @property
    def cutoff(self) -> float:
        return 2.0 * self.params.omega if self.field_omega_max is None else self.field_omega_max

    @property
    def n_modes(self) -> int:
        spacing = self.params.gamma / 20.0 if self.mode_spacing is None else self.mode_spacing
        return max(2, int(round(self.cutoff / spacing)))

    @property
    def period(self) -> float:
        return 4.0 * math.pi * self.n_modes / self.cutoff

    @property
    def measure_time(self) -> float:
        if self.t_measure is None:
            return self.period - self.relax_time
        return self.t_measure

    @property
    def samples_per_period(self) -> int:
        m = max(int(math.ceil(self.period / self.time_step)), 4 * self.n_modes + 3)
        return scipy.fft.next_fast_len(m, real=True)

    @property
    def effective_dt(self) -> float:
        return self.period / self.samples_per_period


@dataclass(frozen=True)
class EnergyStats:
    mean: float
    variance: float
    n_samples: int
    mean_stderr: float
    variance_stderr: float
    kinetic_mean: float
    potential_mean: float
    n_realizations: int

    @property
    def variance_ratio(self) -> float:
        """variance / mean**2; one for an exponential energy distribution."""
        return self.variance / self.mean**2


@dataclass(frozen=True)
class EnergyHistogram:
    edges: np.ndarray
    density: np.ndarray
    mean: float
    fraction_below_mean: float
    fitted_rate: float
    n_samples: int


def _trajectory(cfg: SimConfig, density: SpectralDensity, index: int):
    p = cfg.params
    table = fieldsynth.synthesize(
        density, cfg.cutoff, cfg.n_modes, parallel.realization_seed(cfg.seed, index)
    )
    m = cfg.samples_per_period
    dt = cfg.effective_dt
    n_steps = int(math.ceil((cfg.relax_time + cfg.measure_time) / dt)) + 1
    _, ex = table.sample_period(m, components=(0,))
    ex = ex[:, 0]
    if n_steps + 1 > m:
        ex = np.tile(ex, (n_steps + 1) // m + 1)
    force = (p.charge / p.mass) * ex[: n_steps + 1]
    h = 0.5 * p.gamma * dt
    a = [1.0 + h, -(2.0 - (p.omega * dt) ** 2), 1.0 - h]
    # nxt[n] = x[n + 1], with x[0] = x[-1] = 0
    nxt = lfilter([dt * dt], a, force)
    x = np.empty_like(nxt)
    x[0] = 0.0
    x[1:] = nxt[:-1]
    v = nxt.copy()
    v[2:] -= nxt[:-2]
    v /= 2.0 * dt
    return dt, x, v


def _energies(cfg, x, v):
    p = cfg.params
    kin = v * v
    kin *= 0.5 * p.mass
    pot = x * x
    pot *= 0.5 * p.mass * p.omega**2
    return kin, pot


def _realization(cfg: SimConfig, density: SpectralDensity, index: int, keep_every: int | None):
    _, x, v = _trajectory(cfg, density, index)
    kin, pot = _energies(cfg, x, v)
    eps = kin + pot
    expected = density.mean_energy(cfg.params.omega)
    peak = float(np.max(eps))
    if not np.isfinite(peak) or peak > BLOWUP_FACTOR * max(expected, 1e-300):
        raise IntegrationError(
            f"energy blew up to {peak:.3g} (expected ~{expected:.3g}); "
            f"time step dt = {cfg.effective_dt:.6g} is too large"
        )
    start = int(math.ceil(cfg.relax_time / cfg.effective_dt))
    stop = start + int(round(cfg.measure_time / cfg.effective_dt))
    e = eps[start:stop]
    e2 = e * e
    sums = np.array(
        [e.size, e.sum(), e2.sum(), np.dot(e2, e), np.dot(e2, e2), kin[start:stop].sum(), pot[start:stop].sum()]
    )
    kept = e[::keep_every] if keep_every else None
    return sums, kept


def _run(cfg, density, threads, keep_every=None):
    if not density.covers(0.0, cfg.cutoff):
        raise DomainError(f"density does not cover the drive band [0, {cfg.cutoff}]")
    results = parallel.ordered_map(
        lambda i: _realization(cfg, density, i, keep_every), range(cfg.n_realizations), threads
    )
    return parallel.pairwise_sum([r[0] for r in results]), [r[1] for r in results]


def _stats(cfg: SimConfig, sums) -> EnergyStats:
    n_raw, s1, s2, s3, s4, sk, sp = sums
    mean = s1 / n_raw
    m2 = s2 / n_raw - mean**2
    m4 = s4 / n_raw - 4 * mean * s3 / n_raw + 6 * mean**2 * s2 / n_raw - 3 * mean**4
    var = max(m2, 0.0)
    per_real = max(1, int(cfg.measure_time * cfg.params.gamma))
    n_eff = per_real * cfg.n_realizations
    return EnergyStats(
        mean=mean,
        variance=var,
        n_samples=n_eff,
        mean_stderr=math.sqrt(var / n_eff),
        variance_stderr=math.sqrt(max(m4 - var * var, 0.0) / n_eff),
        kinetic_mean=sk / n_raw,
        potential_mean=sp / n_raw,
        n_realizations=cfg.n_realizations,
    )


def simulate_ensemble(cfg: SimConfig, density: SpectralDensity, threads=1) -> EnergyStats:
    """Mean and variance of the oscillator energy over time and realizations.

    Statistics use every step after ``t_relax``; the quoted sample count
    (and hence the standard errors) counts one sample per 1/gamma.
    """
    sums, _ = _run(cfg, density, threads)
    return _stats(cfg, sums)


def energy_samples(cfg: SimConfig, density: SpectralDensity, per_decorrelation: int = 4, threads=1) -> np.ndarray:
    """Energies thinned to ``per_decorrelation`` samples per 1/gamma."""
    stride = max(1, int(1.0 / (cfg.params.gamma * cfg.effective_dt * per_decorrelation)))
    _, kept = _run(cfg, density, threads, keep_every=stride)
    return np.concatenate(kept)


def energy_histogram(cfg: SimConfig, density: SpectralDensity, n_bins: int = 40, threads=1) -> EnergyHistogram:
    """Normalised histogram of sampled energies with an exponential fit.

    The expected shape is exp(-eps / <eps>) / <eps>: x and v are Gaussian,
    so eps is a scaled chi-squared with two degrees of freedom.  The fitted
    rate comes from a count-weighted least-squares line through the log of
    the populated bins.
    """
    if n_bins < 2:
        raise DomainError("n_bins must be >= 2")
    eps = energy_samples(cfg, density, threads=threads)
    mean = float(eps.mean())
    hist, edges = np.histogram(eps, bins=n_bins, range=(0.0, float(eps.max())), density=True)
    counts, _ = np.histogram(eps, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    ok = counts >= 10
    slope, _ = np.polyfit(centers[ok], np.log(hist[ok]), 1, w=np.sqrt(counts[ok]))
    return EnergyHistogram(
        edges=edges,
        density=hist,
        mean=mean,
        fraction_below_mean=float(np.mean(eps < mean)),
        fitted_rate=float(-slope),
        n_samples=eps.size,
    )


def write_trajectory_csv(stream, cfg: SimConfig, density: SpectralDensity, index: int = 0, stride: int = 1) -> None:
    """Debug dump of one realization as columns t, x, v, eps."""
    dt, x, v = _trajectory(cfg, density, index)
    kin, pot = _energies(cfg, x, v)
    t = np.arange(x.size) * dt
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "x", "v", "eps"])
    for i in range(0, t.size, stride):
        w.writerow([f"{t[i]:.17g}", f"{x[i]:.17g}", f"{v[i]:.17g}", f"{kin[i] + pot[i]:.17g}"])
