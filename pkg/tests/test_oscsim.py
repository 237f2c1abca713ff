import io
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sedstat import DomainError, fieldsynth, oscsim, parallel, spectra
from sedstat.resonance import OscillatorParams
from sedstat.spectra import SpectralDensity

pytestmark = pytest.mark.filterwarnings("ignore:damping ratio")


@pytest.fixture(scope="module")
def params():
    return OscillatorParams.from_tau(5e-3)


def small_cfg(params, **kw):
    base = dict(n_realizations=2, seed=4, mode_spacing=0.01, t_relax=1000.0, t_measure=200.0)
    base.update(kw)
    return oscsim.SimConfig(params, **base)


def test_leapfrog_matches_adaptive_ode(params):
    cfg = small_cfg(params)
    d = SpectralDensity.zeropoint()
    dt, x, v = oscsim._trajectory(cfg, d, 0)
    table = fieldsynth.synthesize(d, cfg.cutoff, cfg.n_modes, parallel.realization_seed(cfg.seed, 0))
    g, w, qm = params.gamma, params.omega, params.charge / params.mass

    def rhs(t, y):
        return [y[1], -g * y[1] - w * w * y[0] + qm * table.field(t)[0, 0]]

    n = int(60.0 / dt)
    t = np.arange(n) * dt
    sol = solve_ivp(rhs, (0, t[-1]), [0.0, 0.0], t_eval=t, rtol=1e-10, atol=1e-14, method="DOP853")
    scale = np.abs(sol.y[0]).max()
    assert np.max(np.abs(x[:n] - sol.y[0])) < 2e-2 * scale
    assert np.max(np.abs(v[1:n] - sol.y[1][1:])) < 2e-2 * np.abs(sol.y[1]).max()


def test_config_defaults(params):
    cfg = oscsim.SimConfig(params)
    assert cfg.time_step == pytest.approx(0.045)
    assert cfg.relax_time == pytest.approx(8 / params.gamma)
    assert cfg.effective_dt <= cfg.time_step
    assert cfg.measure_time == pytest.approx(cfg.period - cfg.relax_time)


@pytest.mark.parametrize(
    "kw", [dict(dt=0.06), dict(t_relax=100.0), dict(n_realizations=0), dict(field_omega_max=0.5)]
)
def test_config_rejects(params, kw):
    with pytest.raises(DomainError):
        oscsim.SimConfig(params, **kw)


@pytest.fixture(scope="module")
def zero_t_stats(params):
    cfg = oscsim.SimConfig(params, n_realizations=40, seed=1)
    return oscsim.simulate_ensemble(cfg, SpectralDensity.zeropoint(), threads=4)


def test_zeropoint_mean_energy(zero_t_stats):
    assert zero_t_stats.mean == pytest.approx(0.5, rel=0.05)
    assert abs(zero_t_stats.mean - 0.5) < 5 * zero_t_stats.mean_stderr + 0.01


def test_exponential_variance(zero_t_stats):
    assert zero_t_stats.variance_ratio == pytest.approx(1.0, abs=0.1)


def test_virial_equipartition(zero_t_stats):
    assert zero_t_stats.kinetic_mean == pytest.approx(zero_t_stats.potential_mean, rel=0.03)


def test_thermal_mean_energy(params):
    cfg = oscsim.SimConfig(params, n_realizations=40, seed=2)
    st = oscsim.simulate_ensemble(cfg, SpectralDensity.total(1.0), threads=4)
    assert st.mean == pytest.approx(spectra.mean_energy(1.0, 1.0), rel=0.05)


def test_threads_do_not_change_result(params):
    cfg = small_cfg(params, n_realizations=5)
    d = SpectralDensity.total(0.7)
    a = oscsim.simulate_ensemble(cfg, d, threads=1)
    b = oscsim.simulate_ensemble(cfg, d, threads=3)
    assert a == b


def test_histogram_is_exponential(params):
    cfg = oscsim.SimConfig(params, n_realizations=20, seed=3)
    h = oscsim.energy_histogram(cfg, SpectralDensity.zeropoint(), n_bins=30, threads=4)
    assert h.fitted_rate * h.mean == pytest.approx(1.0, abs=0.1)
    assert h.fraction_below_mean == pytest.approx(1 - math.exp(-1), abs=0.03)
    assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0, rel=1e-12)


def test_density_must_cover_drive_band(params):
    cfg = small_cfg(params)
    with pytest.raises(DomainError):
        oscsim.simulate_ensemble(cfg, SpectralDensity.constant(1.0, 1.5))


def test_trajectory_dump(params):
    cfg = small_cfg(params)
    buf = io.StringIO()
    oscsim.write_trajectory_csv(buf, cfg, SpectralDensity.zeropoint(), stride=1000)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x,v,eps" and len(lines) > 10
