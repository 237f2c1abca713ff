"""Worked examples with hand-derivable values."""

import math

import numpy as np
import pytest

from sedstat import counting, fieldsynth, fluctuation, spectra
from sedstat.counting import EnergyPartition
from sedstat.fluctuation import OdeSolveConfig
from sedstat.resonance import OscillatorParams, mean_energy_integral, narrow_resonance_error
from sedstat.spectra import SpectralDensity

COTH1 = math.cosh(1) / math.sinh(1)


def test_spectra_values():
    assert spectra.rho_zeropoint(0.0) == 0.0
    assert spectra.rho_zeropoint(1.0) == pytest.approx(0.050660, abs=1e-6)
    assert spectra.rho_zeropoint(2.0) == 8 * spectra.rho_zeropoint(1.0)
    assert spectra.rho_total(1.0, 0.5) == pytest.approx(COTH1 / (2 * math.pi**2), rel=1e-15)
    assert spectra.rho_total(1.0, 0.5) == pytest.approx(0.066519, abs=1e-6)
    assert spectra.rho_total(1.0, 1e6) == pytest.approx(1e6 / math.pi**2, rel=1e-6)
    assert spectra.mean_energy(1.0, 0.5) == pytest.approx(0.656518, abs=1e-6)
    assert spectra.mean_energy(1.0, 100.0) == pytest.approx(100.0, rel=1e-3)
    assert spectra.mean_thermal_energy(1.0, 1.0) == pytest.approx(1 / (math.e - 1), rel=1e-15)
    for t in (0.0, 0.01, 1.0, 1e3):
        # exact up to the rounding of the final subtraction
        e = spectra.mean_energy(1.0, t)
        assert e - spectra.mean_thermal_energy(1.0, t) == pytest.approx(0.5, abs=np.spacing(e))


def test_resonance_values():
    p = OscillatorParams.from_tau(1e-6)
    zp = mean_energy_integral(p, SpectralDensity.zeropoint()).value
    assert abs(zp - 0.5) / 0.5 < 1e-4
    tot = mean_energy_integral(p, SpectralDensity.total(1.0)).value
    assert tot == pytest.approx(1.081977, rel=1e-4)
    zero = mean_energy_integral(p, SpectralDensity.constant(0.0, 200.0)).value
    assert zero == 0.0
    e6 = narrow_resonance_error(p, SpectralDensity.zeropoint())
    e3 = narrow_resonance_error(OscillatorParams.from_tau(1e-3), SpectralDensity.zeropoint())
    assert e6 < 1e-4 and e6 < e3 < 1e-1


def test_flat_density_error_below_ten_tau():
    for tau in (1e-5, 1e-4, 1e-3):
        err = narrow_resonance_error(OscillatorParams.from_tau(tau), SpectralDensity.constant(1.0, 200.0))
        assert err < 10 * tau


def test_field_values():
    tab = fieldsynth.synthesize(SpectralDensity.constant(0.0, 5.0), 5.0, 10, 0)
    assert np.all(tab.amplitudes == 0) and np.all(tab.field([0.0, 1.0]) == 0)
    # one populated cell of weight w
    d = SpectralDensity.tabulated([0.0, 0.9, 0.95, 1.0, 2.0], [0, 0, 3.0, 0, 0])
    tab = fieldsynth.synthesize(d, 2.0, 20, 1)
    assert np.count_nonzero(tab.amplitudes) == 1
    assert tab.mean_square() == pytest.approx(3.0 * 0.1, rel=1e-12)


def test_correlation_even_in_time():
    d = SpectralDensity.zeropoint()
    t = np.array([2.0, -2.0, 0.0])
    est = fieldsynth.correlation_empirical(fieldsynth.ensemble(d, 3.0, 100, 500, seed=9), t)
    gap = abs(est.correlation[0] - est.correlation[1])
    assert gap < 3 * math.hypot(est.stderr[0], est.stderr[1])
    integral = fieldsynth.correlation_oracle(d, 3.0, [0.0])[0]
    assert abs(est.correlation[2] - integral) < 3 * est.stderr[2]


def test_weight_values():
    for mode in ("flat", "field"):
        assert fieldsynth.sample_weights(1, mode, seed=0).alphas.tolist() == [1.0]
    rng = np.random.default_rng(4)
    flat = fieldsynth.weight_batch(2, 10_000, "flat", rng)[:, 0]
    from scipy import stats

    assert stats.kstest(flat, "uniform").statistic < 0.02
    field = fieldsynth.weight_batch(2, 10_000, "field", rng)[:, 0]
    assert abs(field.mean() - 0.5) < 0.01


def test_fluctuation_values():
    assert fluctuation.variance_residual(1.0, 1.0) < 1e-12
    assert fluctuation.variance_residual(1.0, 0.01) < 1e-10
    assert fluctuation.variance_residual(1.0, 1.0, derivative="central") < 1e-6
    cfg = OdeSolveConfig.from_low_temperature(1.0, 0.05, 1.0)
    assert fluctuation.solve_mean_energy(1.0, cfg).mean_energy[-1] == pytest.approx(1.08198, rel=1e-5)
    hot = fluctuation.solve_mean_energy(1.0, OdeSolveConfig.from_low_temperature(1.0, 0.05, 100.0))
    assert hot.mean_energy[-1] / 100.0 == pytest.approx(1.0, rel=1e-2)


def test_counting_values():
    assert counting.probability_fraction(2, 3) == pytest.approx(0.25)
    assert counting.probability_exact(2, 3).probability == pytest.approx(0.25, rel=1e-14)
    assert counting.probability_exact(1, 7).probability == pytest.approx(1.0, rel=1e-14)
    assert counting.probability_exact(3, 2).probability == pytest.approx(1 / 6, rel=1e-14)
    for occ, exact in [((3.0, 0.0), 0.25), ((1.5, 1.5), 0.25), ((2.0, 0.0, 0.0), 1 / 6)]:
        res = counting.probability_mc(EnergyPartition.from_occupations(occ), 1_000_000, seed=7)
        assert abs(res.probability - exact) < 3 * res.stderr


def test_partition_values():
    p = counting.partition_from_energies([1, 1, 1, 1], 4)
    assert p.fraction == 1.0 and p.occupations.tolist() == [1.0, 1.0, 1.0, 1.0]
    p = counting.partition_from_energies([0.3, 0.7], 5)
    assert p.fraction == pytest.approx(0.2)
    np.testing.assert_allclose(p.occupations, [1.5, 3.5], rtol=1e-14)
    rng = np.random.default_rng(0)
    for _ in range(100):
        u = rng.exponential(size=rng.integers(1, 8))
        n = int(rng.integers(1, 50))
        p = counting.partition_from_energies(u, n)
        assert abs(math.fsum(p.occupations) - n) <= 1e-12 * n
        assert p.fraction * n == pytest.approx(p.total_energy, rel=1e-12)
        assert math.fsum(p.site_energies) == pytest.approx(math.fsum(u), rel=1e-12)
