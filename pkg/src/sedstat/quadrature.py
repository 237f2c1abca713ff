"""Globally adaptive interval-bisection quadrature with an honest error estimate.

Each panel is integrated with a low/high Gauss-Legendre pair (7 and 15
nodes); the panel error is the absolute difference of the two rules.  The
panel with the largest error is bisected until the summed error meets the
tolerance or the evaluation budget runs out.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from sedstat.errors import QuadratureBudgetError

_LOW_X, _LOW_W = np.polynomial.legendre.leggauss(7)
_HIGH_X, _HIGH_W = np.polynomial.legendre.leggauss(15)
_NODES = np.concatenate([_LOW_X, _HIGH_X])
EVALS_PER_PANEL = _NODES.size


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error: float
    n_evals: int
    n_panels: int

    @property
    def rel_error(self) -> float:
        if self.value == 0:
            return 0.0 if self.abs_error == 0 else math.inf
        return self.abs_error / abs(self.value)


def _panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    low = half * float(np.dot(_LOW_W, y[: _LOW_X.size]))
    high = half * float(np.dot(_HIGH_W, y[_LOW_X.size :]))
    return high, abs(high - low)


def integrate(f, breakpoints, rel_tol=1e-10, abs_tol=0.0, max_evals=200_000):
    """Integrate a vectorised ``f`` over consecutive ``breakpoints``.

    Parameters
    ----------
    f : callable
        Maps a 1-D array of abscissae to an array of integrand values.
    breakpoints : sequence of float
        Increasing interval ends; each sub-interval starts as its own panel,
        so put known peaks or kinks here.
    rel_tol, abs_tol : float
        Stop once the summed error estimate is below
        ``max(abs_tol, rel_tol * |value|)``.
    max_evals : int
        Budget of integrand evaluations.

    Raises
    ------
    QuadratureBudgetError
        If the budget runs out first; carries the best estimate.
    """
    pts = [float(p) for p in breakpoints]
    if len(pts) < 2 or any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("breakpoints must be strictly increasing with at least two entries")
    if rel_tol <= 0 and abs_tol <= 0:
        raise ValueError("need a positive rel_tol or abs_tol")

    heap = []
    panels = {}
    evals = 0
    for k, (a, b) in enumerate(zip(pts, pts[1:])):
        val, err = _panel(f, a, b)
        evals += EVALS_PER_PANEL
        panels[k] = (a, b, val, err)
        heapq.heappush(heap, (-err, k))
    next_id = len(panels)

    def totals():
        vals = [p[2] for p in panels.values()]
        errs = [p[3] for p in panels.values()]
        return math.fsum(vals), math.fsum(errs)

    value, error = totals()
    while True:
        if error <= max(abs_tol, rel_tol * abs(value)):
            # running sums drift; confirm with compensated sums before stopping
            value, error = totals()
            if error <= max(abs_tol, rel_tol * abs(value)):
                break
        if evals + 2 * EVALS_PER_PANEL > max_evals:
            value, error = totals()
            raise QuadratureBudgetError(
                f"quadrature budget of {max_evals} evaluations exhausted "
                f"(estimate {value:.6g} +/- {error:.3g})",
                value,
                error,
                evals,
            )
        _, k = heapq.heappop(heap)
        a, b, old_val, old_err = panels.pop(k)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            value, error = totals()
            raise QuadratureBudgetError(
                "quadrature panel width reached machine precision", value, error, evals
            )
        value -= old_val
        error -= old_err
        for lo, hi in ((a, mid), (mid, b)):
            val, err = _panel(f, lo, hi)
            panels[next_id] = (lo, hi, val, err)
            heapq.heappush(heap, (-err, next_id))
            next_id += 1
            value += val
            error += err
        evals += 2 * EVALS_PER_PANEL
    return QuadResult(value, error, evals, len(panels))
