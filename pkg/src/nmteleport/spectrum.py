"""Isolated roots of Y(E) = E (bound states), their residues, and parameter sweeps."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from . import spectral
from .errors import DomainError

log = logging.getLogger(__name__)

# tighter than the generic quadrature defaults so root residuals reach 1e-10
ROOT_EPSABS = 1e-13
ROOT_EPSREL = 1e-12
MAX_EXPANSIONS = 200


@dataclass(frozen=True)
class BoundState:
    E_b: float
    Z: float
    gap: str  # "below" or "above" the continuum


@dataclass(frozen=True, eq=False)
class SpectrumSweep:
    params: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    states: tuple  # one tuple of BoundState per parameter value

    def z_branch(self, gap: str | None = None):
        """Residue per sample, 0.0 where no bound state exists."""
        out = np.zeros(self.params.size)
        for i, group in enumerate(self.states):
            zs = [b.Z for b in group if gap is None or b.gap == gap]
            out[i] = max(zs) if zs else 0.0
        return out

    def threshold_bracket(self):
        """(last parameter without, first parameter with) a bound state, or None."""
        has = np.array([bool(g) for g in self.states])
        if not has.any() or has.all():
            return None
        first = int(np.argmax(has))
        if first == 0:
            return None
        return float(self.params[first - 1]), float(self.params[first])


def y_function(sd, omega0: float, E: float) -> float:
    """Y(E) = w0 - int J(w)/(w - E) dw for E outside the continuum."""
    lo, hi = sd.support
    if lo < E < hi:
        raise DomainError(f"E = {E} lies inside the continuum band ({lo}, {hi})")
    return omega0 - spectral.cauchy_transform(sd, E, ROOT_EPSABS, ROOT_EPSREL)


def _gap_function(sd, omega0):
    return lambda E: y_function(sd, omega0, E) - E


def bound_state_exists(sd, omega0: float) -> dict:
    """Sign test of Y(E) - E at each band edge; keys are the gap ids."""
    lo, hi = sd.support
    f = _gap_function(sd, omega0)
    out = {"below": bool(f(lo) < 0)}
    if math.isfinite(hi):
        out["above"] = bool(f(hi) > 0)
    return out


def ohmic_criteria(sd: spectral.OhmicFamily, omega0: float) -> dict:
    """Both bound-state criteria for the Ohmic family.

    ``y_at_zero`` is the integral Y(0); ``closed_form`` is w0 - eta wc Gamma(s),
    its analytic value; ``with_factor_two`` is w0 - 2 eta wc Gamma(s). A bound
    state exists when the first two are negative.
    """
    g = special.gamma(sd.s)
    return {
        "y_at_zero": y_function(sd, omega0, 0.0),
        "closed_form": omega0 - sd.eta * sd.omega_c * g,
        "with_factor_two": omega0 - 2 * sd.eta * sd.omega_c * g,
    }


def _bracket(f, edge, direction, scale):
    """Walk away from ``edge`` geometrically until f changes sign."""
    inner = edge
    step = scale
    for _ in range(MAX_EXPANSIONS):
        outer = edge + direction * step
        if (f(outer) > 0) == (direction < 0):
            return (outer, inner) if direction < 0 else (inner, outer)
        inner = outer
        step *= 2
    return None


def find_bound_states(sd, omega0: float) -> list:
    lo, hi = sd.support
    f = _gap_function(sd, omega0)
    scale = 1e-3 * max(1.0, abs(omega0), hi - lo if math.isfinite(hi) else 1.0)
    found = []
    for gap, edge, direction in (("below", lo, -1), ("above", hi, +1)):
        if not math.isfinite(edge):
            continue
        fe = f(edge)
        if (direction < 0 and fe >= 0) or (direction > 0 and fe <= 0):
            continue
        br = _bracket(f, edge, direction, scale)
        if br is None:
            log.warning("no sign change found in the %s gap after %d expansions", gap, MAX_EXPANSIONS)
            continue
        a, b = br
        E_b = optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        if not (E_b < lo or E_b > hi):
            log.warning("root in the %s gap collapsed onto the band edge", gap)
            continue
        resid = abs(f(E_b))
        if resid > 1e-10:
            log.warning("bound-state residual %.2e exceeds 1e-10", resid)
        Z = 1.0 / (1.0 + spectral.residue_integral(sd, E_b, ROOT_EPSABS, ROOT_EPSREL))
        found.append(BoundState(E_b=float(E_b), Z=float(Z), gap=gap))
    return found


def _sweep_point(family, omega0, p):
    sd = family(p)
    lo, hi = sd.support
    return lo, hi, tuple(find_bound_states(sd, omega0))


def spectrum_sweep(family: Callable[[float], object], omega0: float, grid: Sequence[float],
                   jobs: int = 1) -> SpectrumSweep:
    """Band edges and bound states for each value in ``grid``.

    ``family`` maps a parameter value to a spectral density; with ``jobs`` > 1
    it must be picklable. Results keep grid order.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty parameter grid")
    d = np.diff(grid)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("parameter grid must be strictly monotone")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, [family] * grid.size, [omega0] * grid.size, grid))
    else:
        rows = [_sweep_point(family, omega0, p) for p in grid]
    lo, hi, states = zip(*rows)
    return SpectrumSweep(params=grid, band_lo=np.array(lo), band_hi=np.array(hi), states=tuple(states))


def locate_threshold(family, omega0: float, a: float, b: float, tol: float = 1e-4) -> float:
    """Bisect the parameter where a bound state first appears between a and b."""
    has = lambda p: any(bound_state_exists(family(p), omega0).values())
    ha, hb = has(a), has(b)
    if ha == hb:
        raise ValueError("bound-state existence does not change across the bracket")
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if has(m) == ha:
            a = m
        else:
            b = m
    return 0.5 * (a + b)
