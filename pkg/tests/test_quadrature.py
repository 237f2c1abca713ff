import math

import numpy as np
import pytest

from sedstat import QuadratureBudgetError
from sedstat.quadrature import EVALS_PER_PANEL, integrate


def test_polynomial_exact_single_panel():
    # GL15 is exact to degree 29
    res = integrate(lambda x: x**12 - 3 * x**5, [0.0, 2.0], rel_tol=1e-14)
    assert res.value == pytest.approx(2**13 / 13 - 2**6 / 2, rel=1e-14)
    assert res.n_evals == EVALS_PER_PANEL


def test_lorentzian_with_breakpoint():
    eps = 1e-6
    f = lambda x: eps / ((x - 0.3) ** 2 + eps**2) / math.pi
    res = integrate(f, [0.0, 0.3, 1.0], rel_tol=1e-11, max_evals=100_000)
    exact = (math.atan(0.7 / eps) + math.atan(0.3 / eps)) / math.pi
    assert res.value == pytest.approx(exact, rel=1e-10)
    assert abs(res.value - exact) <= 10 * res.abs_error + 1e-15


def test_error_estimate_is_honest():
    # estimate must bound the true error on a smooth oscillatory integrand
    res = integrate(lambda x: np.cos(40 * x), [0.0, 1.0], rel_tol=1e-6)
    exact = math.sin(40.0) / 40.0
    assert abs(res.value - exact) <= res.abs_error


def test_budget_error_carries_estimate():
    f = lambda x: 1e-9 / ((x - 0.5) ** 2 + 1e-18)
    with pytest.raises(QuadratureBudgetError) as info:
        integrate(f, [0.0, 1.0], rel_tol=1e-12, max_evals=500)
    err = info.value
    assert err.n_evals <= 500
    assert math.isfinite(err.value) and err.abs_error > 0


def test_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        integrate(np.sin, [1.0, 0.0])
