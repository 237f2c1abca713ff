"""Entropy per oscillator and the thermodynamic limit of the energy fraction.

Stirling's formula applied to -log P / A with P = N!(A-1)!/(N+A-1)! gives
the probabilistic entropy

    S*(r) = (1 + r) log(1 + r) - r log r,   r = N/A = U/(qA)

while integrating 1/T = dS/d<eps> for the coth mean energy gives the caloric
entropy S = S*(<u>/w).  Matching the two fixes q = w U / <U>, so the mean
fraction is w and its spread shrinks like A**-1/2 when U fluctuates by
about sqrt(A) <u>.  The fluctuation is modelled as Gaussian; only its zero
mean and sqrt(A) scale are part of the argument.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import xlog1py

from sedstat import parallel, spectra
from sedstat.counting import log_probability_exact
from sedstat.errors import DomainError


def entropy_star(ratio):
    """(1 + r) log(1 + r) - r log r, in units of k_B; zero at r = 0."""
    r = np.asarray(ratio, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError(f"ratio must be >= 0, got {ratio}")
    # log1p(r) + r log1p(1/r) avoids cancelling the two large terms at big r
    with np.errstate(divide="ignore"):
        out = np.log1p(r) + xlog1py(r, 1.0 / r)
    return out.item() if out.ndim == 0 else out


def caloric_entropy(thermal_energy, omega):
    """Entropy of an oscillator with mean thermal energy <u>: S*(<u>/w)."""
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega}")
    return entropy_star(np.asarray(thermal_energy, dtype=float) / omega)


def caloric_entropy_derivative(mean_energy, omega):
    """dS/d<eps> from differentiating S*(r), r = (<eps> - w/2)/w.

    dS*/dr = log(1 + r) + 1 - log r - 1 = log((1 + r)/r), divided by w.
    """
    r = (np.asarray(mean_energy, dtype=float) - omega / 2) / omega
    if np.any(r <= 0):
        raise DomainError("mean energy must exceed the zeropoint value w/2")
    out = (np.log1p(r) - np.log(r)) / omega
    return out.item() if out.ndim == 0 else out


def inverse_temperature(mean_energy, omega):
    """1/T = log(1 + w / (<eps> - w/2)) / w."""
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega}")
    u = np.asarray(mean_energy, dtype=float) - omega / 2
    if np.any(u <= 0):
        raise DomainError("mean energy must exceed w/2: zero thermal energy has no finite temperature")
    out = np.log1p(omega / u) / omega
    return out.item() if out.ndim == 0 else out


def stirling_gap(n_sites: int, ratio: float = 1.0) -> float:
    """| -log P / A - S*(N/A) | for N = round(ratio * A)."""
    n = int(round(ratio * n_sites))
    s_exact = -log_probability_exact(n_sites, n) / n_sites
    return abs(s_exact - entropy_star(n / n_sites))


@dataclass(frozen=True)
class ThermoLimitConfig:
    n_sites: int
    omega: float = 1.0
    temperature: float = 1.0
    n_fractions: int | None = None  # defaults to n_sites
    trials: int = 1000
    seed: object = 0  # int or numpy SeedSequence
    fluctuations: bool = True

    def __post_init__(self):
        if self.n_sites < 2:
            raise DomainError(f"A must be >= 2, got {self.n_sites}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0, got {self.temperature}")
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if self.trials < 2:
            raise DomainError("need at least two trials")
        if self.n_fractions is not None and self.n_fractions < 1:
            raise DomainError("N must be >= 1")

    @property
    def fractions(self) -> int:
        return self.n_sites if self.n_fractions is None else self.n_fractions


@dataclass(frozen=True)
class LimitReport:
    n_sites: int
    n_fractions: int
    mean_q: float  # in units of omega
    spread_q: float  # sample standard deviation, units of omega
    stderr_q: float
    s_star_error: float  # mean |S*(U/qA) - S| with q from the limit relation
    s_star_error_naive: float  # same with q = U/N
    resampled: int
    trials: int


def thermodynamic_limit_run(cfg: ThermoLimitConfig) -> LimitReport:
    """Sample U = A<u> + dU and the energy fraction that makes S* equal S.

    dU ~ Normal(0, sqrt(A) <u>); draws with U <= 0 are redrawn and counted.
    """
    a = cfg.n_sites
    u_mean = spectra.mean_thermal_energy(cfg.omega, cfg.temperature)
    if not u_mean > 0:
        raise DomainError("thermal energy underflows at this temperature")
    expected_total = a * u_mean
    rng = np.random.default_rng(cfg.seed)
    if cfg.fluctuations:
        sd = math.sqrt(a) * u_mean
        totals = expected_total + sd * rng.standard_normal(cfg.trials)
        resampled = 0
        bad = totals <= 0
        while np.any(bad):
            resampled += int(bad.sum())
            totals[bad] = expected_total + sd * rng.standard_normal(int(bad.sum()))
            bad = totals <= 0
    else:
        totals = np.full(cfg.trials, expected_total)
        resampled = 0
    q = cfg.omega * totals / expected_total
    s_caloric = caloric_entropy(u_mean, cfg.omega)
    s_matched = entropy_star(totals / (q * a))
    s_naive = entropy_star(totals / ((totals / cfg.fractions) * a))
    q_rel = q / cfg.omega
    spread = float(np.std(q_rel, ddof=1))
    return LimitReport(
        n_sites=a,
        n_fractions=cfg.fractions,
        mean_q=float(np.mean(q_rel)),
        spread_q=spread,
        stderr_q=spread / math.sqrt(cfg.trials),
        s_star_error=float(np.mean(np.abs(s_matched - s_caloric))),
        s_star_error_naive=float(np.mean(np.abs(s_naive - s_caloric))),
        resampled=resampled,
        trials=cfg.trials,
    )


def limit_sweep(sizes, seed: int = 0, **kw) -> list[LimitReport]:
    """Run :func:`thermodynamic_limit_run` for each A with seed (seed, index)."""
    return [
        thermodynamic_limit_run(ThermoLimitConfig(int(a), seed=parallel.realization_seed(seed, i), **kw))
        for i, a in enumerate(sizes)
    ]


def spread_slope(reports) -> float:
    """Least-squares slope of log(spread_q) against log(A)."""
    a = np.log([r.n_sites for r in reports])
    s = np.log([r.spread_q for r in reports])
    return float(np.polyfit(a, s, 1)[0])


REPORT_COLUMNS = ("A", "N", "mean_q", "spread_q", "stderr_q", "S_star_error", "S_star_error_naive", "resampled", "trials")


def report_row(r: LimitReport) -> list:
    return [getattr(r, f.name) for f in fields(r)]


def write_reports_csv(stream, reports) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in report_row(r)])
