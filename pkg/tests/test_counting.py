import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import comb

from sedstat import DomainError, counting
from sedstat.counting import EnergyPartition


def brute_force_dirichlet_average(occ):
    # N! E[prod a^n / n!] for Dirichlet(1,...,1) via Dirichlet moments:
    # E[prod a^n] = Gamma(A) prod Gamma(1+n) / Gamma(A + N)
    a, n = len(occ), sum(occ)
    moment = math.gamma(a) * math.prod(math.gamma(1 + x) for x in occ) / math.gamma(a + n)
    return math.gamma(n + 1) * moment / math.prod(math.gamma(1 + x) for x in occ)


@given(st.integers(1, 30), st.integers(0, 40))
@settings(max_examples=200, deadline=None)
def test_log_gamma_matches_rational(a, n):
    exact = counting.probability_fraction(a, n)
    assert counting.probability_exact(a, n).probability == pytest.approx(float(exact), rel=1e-12)


@pytest.mark.parametrize("a,n", [(1, 5), (2, 3), (3, 4), (5, 2)])
def test_closed_form_is_inverse_composition_count(a, n):
    assert counting.probability_fraction(a, n) == Fraction(1, int(comb(n + a - 1, a - 1, exact=True)))


@pytest.mark.parametrize("occ", [(1.5, 1.5), (0.2, 2.3, 0.5), (4.0, 0.0, 0.0), (0.7, 0.7, 0.8, 0.8)])
def test_dirichlet_moment_oracle_agrees(occ):
    a, n = len(occ), round(sum(occ))
    assert brute_force_dirichlet_average(occ) == pytest.approx(counting.probability_exact(a, n).probability, rel=1e-12)


def test_normalization_exact():
    assert counting.normalization_sum(3, 4) == 1


def test_weak_compositions_count():
    comps = list(counting.weak_compositions(4, 3))
    assert len(comps) == 15 and len(set(comps)) == 15
    assert all(sum(c) == 4 for c in comps)


def test_mc_agrees_with_closed_form():
    part = EnergyPartition.from_occupations([0.3, 1.2, 1.5])
    res = counting.probability_mc(part, 400_000, seed=3)
    exact = counting.probability_exact(3, 3).probability
    assert abs(res.probability - exact) < 4 * res.stderr
    assert res.stderr / exact < 0.01


def test_mc_threads_invariant():
    part = EnergyPartition.from_occupations([1.0, 2.0])
    a = counting.probability_mc(part, 250_000, seed=8, threads=1)
    b = counting.probability_mc(part, 250_000, seed=8, threads=4)
    assert a == b


def test_field_weights_miss_closed_form():
    part = EnergyPartition.from_occupations([3.0, 0.0, 0.0])
    res = counting.probability_mc(part, 400_000, seed=1, weight_mode="field")
    exact = counting.probability_exact(3, 3).probability
    # Dirichlet(3/2) moment: Gamma(9/2) Gamma(9/2) / (Gamma(3/2) Gamma(15/2))
    oracle = math.gamma(4.5) * math.gamma(4.5) / (math.gamma(1.5) * math.gamma(7.5))
    assert res.probability == pytest.approx(oracle, rel=0.02)
    assert abs(res.probability - exact) > 10 * res.stderr


def test_partition_from_energies():
    part = counting.partition_from_energies([0.1, 0.7, 0.2], 7)
    assert math.fsum(part.occupations) == pytest.approx(7, abs=1e-12)
    assert part.fraction == pytest.approx(1.0 / 7)
    np.testing.assert_allclose(part.site_energies, [0.1, 0.7, 0.2], rtol=1e-12)


@pytest.mark.parametrize(
    "call",
    [
        lambda: EnergyPartition.from_occupations([1.0, -1.0, 1.0]),
        lambda: EnergyPartition.from_occupations([0.4, 0.4]),
        lambda: EnergyPartition(1.0, 3, np.array([1.0, 1.0])),
        lambda: counting.probability_exact(0, 2),
        lambda: counting.probability_exact(2, -1),
        lambda: counting.partition_from_energies([0.0, 0.0], 2),
        lambda: counting.probability_mc(EnergyPartition.from_occupations([1.0, 1.0]), 10, seed=0),
    ],
)
def test_rejects_bad_input(call):
    with pytest.raises(DomainError):
        call()
