"""Counting distinguishable energy fractions over distinguishable oscillators.

The thermal energy U of A oscillators is cut into N fractions q = U/N; site
i holds n_i = u_i / q of them (not necessarily an integer).  With random
absorption weights alpha on the simplex,

    P{n_i} = N! < prod_i alpha_i**n_i / Gamma(n_i + 1) >

and for the flat (uniform) simplex average this equals
N! (A-1)! / (N+A-1)! whatever the individual n_i are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from sedstat import parallel
from sedstat.errors import DomainError
from sedstat.fieldsynth import WeightMode, weight_batch

MC_BATCH = 100_000


@dataclass(frozen=True)
class EnergyPartition:
    """Site energies u_i = n_i q with sum(n_i) = N and q = U / N."""

    total_energy: float
    n_fractions: int
    occupations: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.occupations, dtype=float)
        if n.ndim != 1 or n.size < 1:
            raise DomainError("need at least one oscillator")
        if np.any(n < 0) or not np.all(np.isfinite(n)):
            raise DomainError("occupation numbers must be finite and >= 0")
        if self.n_fractions < 1 or int(self.n_fractions) != self.n_fractions:
            raise DomainError(f"N must be an integer >= 1, got {self.n_fractions}")
        if abs(math.fsum(n) - self.n_fractions) > 1e-12 * self.n_fractions:
            raise DomainError(f"occupations sum to {math.fsum(n)}, not N = {self.n_fractions}")
        if not self.total_energy > 0:
            raise DomainError("total thermal energy must be > 0")

    @property
    def n_sites(self) -> int:
        return self.occupations.size

    @property
    def fraction(self) -> float:
        """q = U / N."""
        return self.total_energy / self.n_fractions

    @property
    def site_energies(self) -> np.ndarray:
        return self.occupations * self.fraction

    @classmethod
    def from_occupations(cls, occupations, fraction: float = 1.0) -> "EnergyPartition":
        """Build from n_i directly; N is their (integer) sum."""
        n = np.asarray(occupations, dtype=float)
        total = math.fsum(n)
        n_frac = int(round(total))
        if abs(total - n_frac) > 1e-9:
            raise DomainError(f"occupations must sum to an integer N, got {total}")
        return cls(n_frac * fraction, n_frac, n)


def partition_from_energies(energies, n_fractions: int) -> EnergyPartition:
    """Split site energies into N fractions: U = sum u, q = U/N, n_i = u_i/q."""
    u = np.asarray(energies, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise DomainError("need a 1-D list of site energies")
    if np.any(u < 0):
        raise DomainError("site energies must be >= 0")
    total = math.fsum(u)
    if not total > 0:
        raise DomainError("site energies are all zero; nothing to partition")
    if n_fractions < 1:
        raise DomainError(f"N must be >= 1, got {n_fractions}")
    occ = u * (n_fractions / total)
    # put the rounding residue on the largest site so the sum is N to ~1 ulp
    k = int(np.argmax(occ))
    occ[k] += n_fractions - math.fsum(occ)
    return EnergyPartition(total, n_fractions, occ)


@dataclass(frozen=True)
class ProbabilityResult:
    log_probability: float
    stderr: float | None = None  # on the probability, MC only
    n_samples: int | None = None

    @property
    def probability(self) -> float:
        return math.exp(self.log_probability)


def log_probability_exact(n_sites: int, n_fractions: int) -> float:
    """log of N! (A-1)! / (N+A-1)!."""
    if n_sites < 1:
        raise DomainError(f"A must be >= 1, got {n_sites}")
    if n_fractions < 0:
        raise DomainError(f"N must be >= 0, got {n_fractions}")
    a, n = n_sites, n_fractions
    return float(gammaln(n + 1) + gammaln(a) - gammaln(n + a))


def probability_exact(n_sites: int, n_fractions: int) -> ProbabilityResult:
    """Closed-form probability of any occupation set, computed via log-gamma."""
    return ProbabilityResult(log_probability_exact(n_sites, n_fractions))


def probability_fraction(n_sites: int, n_fractions: int) -> Fraction:
    """The same closed form in exact rational arithmetic."""
    a, n = n_sites, n_fractions
    return Fraction(math.factorial(n) * math.factorial(a - 1), math.factorial(n + a - 1))


def _log_products(occ, size, mode, rng):
    alpha = weight_batch(occ.size, size, mode, rng)
    occupied = occ > 0
    # alpha**0 = 1 even when alpha = 0; only occupied sites contribute logs
    with np.errstate(divide="ignore"):
        logs = np.log(alpha[:, occupied]) @ occ[occupied]
    return logs


def probability_mc(
    partition: EnergyPartition,
    samples: int,
    seed: int,
    weight_mode=WeightMode.FLAT_SIMPLEX,
    threads=1,
) -> ProbabilityResult:
    """Monte Carlo estimate of P{n_i} by sampling weight vectors.

    The average of prod alpha**n is formed in log space, shifted by the
    largest sampled log-product, and batch statistics are merged with a
    fixed pairwise tree of (count, mean, M2) triples.  Batch ``b`` draws from
    ``SeedSequence(seed, spawn_key=(b,))``.

    With ``weight_mode=FIELD_ENERGY`` the weights follow the field-energy
    model (Dirichlet(3/2)) with no importance correction, so the estimate
    is expected to miss the closed form; it is reported as is.
    """
    if samples < 1000:
        raise DomainError(f"need at least 1000 samples, got {samples}")
    occ = np.asarray(partition.occupations, dtype=float)
    if np.any(occ < 0):
        raise DomainError("occupation numbers must be >= 0")
    mode = WeightMode(weight_mode)
    n_batches = -(-samples // MC_BATCH)
    sizes = [MC_BATCH] * (n_batches - 1) + [samples - MC_BATCH * (n_batches - 1)]

    def run(b):
        return _log_products(occ, sizes[b], mode, parallel.realization_rng(seed, b))

    batches = parallel.ordered_map(run, range(n_batches), threads)
    shift = max(float(np.max(l)) for l in batches)
    if not np.isfinite(shift):
        return ProbabilityResult(-math.inf, 0.0, samples)
    stats = []
    for logs in batches:
        w = np.exp(logs - shift)
        mean = float(np.mean(w))
        stats.append((w.size, mean, float(np.sum((w - mean) ** 2))))
    while len(stats) > 1:
        nxt = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            nxt.append(stats[-1])
        stats = nxt
    n, mean, m2 = stats[0]
    log_norm = float(gammaln(partition.n_fractions + 1) - np.sum(gammaln(occ + 1)))
    if mean == 0:
        return ProbabilityResult(-math.inf, 0.0, n)
    log_p = log_norm + shift + math.log(mean)
    sd = math.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    stderr = math.exp(log_norm + shift) * sd / math.sqrt(n)
    return ProbabilityResult(log_p, stderr, n)


def _merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, m2a + m2b + delta * delta * na * nb / n


def weak_compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first, *rest)


def normalization_sum(n_sites: int, n_fractions: int) -> Fraction:
    """Sum of the closed-form probability over all weak compositions of N.

    Each integer occupation set has the same probability, and there are
    C(N+A-1, A-1) of them, so the sum is exactly one.
    """
    count = sum(1 for _ in weak_compositions(n_fractions, n_sites))
    return count * probability_fraction(n_sites, n_fractions)
