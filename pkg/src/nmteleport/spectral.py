"""Spectral densities J(w), the memory kernel mu(x) and principal-value shifts.

Frequencies are measured in units of the system frequency (w0 = 1) and times
in units of 1/w0 unless a caller chooses otherwise; nothing here assumes it.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .errors import QuadratureError, SingularEndpointError

EPSABS = 1e-10
EPSREL = 1e-8
# exp(-w/wc) drops below this beyond the Ohmic truncation point
CUTOFF_FLOOR = 1e-16
NEAR_EDGE = 1e-3


@dataclass(frozen=True)
class OhmicFamily:
    """J(w) = eta * w**s * wc**(1-s) * exp(-w/wc) on (0, inf)."""

    eta: float
    s: float = 1.0
    omega_c: float = 10.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.s <= 0:
            raise ValueError("Ohmicity s must be positive")
        if self.omega_c <= 0:
            raise ValueError("cutoff frequency must be positive")

    @property
    def support(self):
        return 0.0, math.inf

    @property
    def omega_max(self):
        return self.omega_c * math.log(1.0 / CUTOFF_FLOOR) * max(1.0, self.s)

    def __call__(self, w):
        if isinstance(w, (float, int)):  # scalar path used inside quad
            if w <= 0:
                return 0.0
            return self.eta * w**self.s * self.omega_c ** (1 - self.s) * math.exp(-w / self.omega_c)
        w = np.asarray(w, dtype=float)
        wp = np.where(w > 0, w, 1.0)
        val = self.eta * wp**self.s * self.omega_c ** (1 - self.s) * np.exp(-wp / self.omega_c)
        out = np.where(w > 0, val, 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Semicircle:
    """Density of a nearest-neighbour resonator chain seen from its end site.

    J(w) = g**2 / (2 pi xi**2) * sqrt(4 xi**2 - (w - w_r)**2) on [w_r - 2xi, w_r + 2xi].
    """

    g: float
    xi: float
    omega_r: float = 1.0

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("hopping xi must be positive")
        if self.g < 0:
            raise ValueError("coupling g must be non-negative")

    @property
    def support(self):
        return self.omega_r - 2 * self.xi, self.omega_r + 2 * self.xi

    @property
    def prefactor(self):
        return self.g**2 / (2 * math.pi * self.xi**2)

    def __call__(self, w):
        if isinstance(w, (float, int)):
            arg = 4 * self.xi**2 - (w - self.omega_r) ** 2
            return self.prefactor * math.sqrt(arg) if arg > 0 else 0.0
        w = np.asarray(w, dtype=float)
        arg = 4 * self.xi**2 - (w - self.omega_r) ** 2
        out = self.prefactor * np.sqrt(np.clip(arg, 0.0, None))
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear J through sorted (omega, J) samples, zero outside."""

    omega: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        j = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != j.shape or w.size < 2:
            raise ValueError("need matching 1-d omega and J arrays with at least two samples")
        if np.any(np.diff(w) <= 0):
            raise ValueError("omega samples must be strictly increasing")
        if np.any(j < 0) or not np.all(np.isfinite(j)):
            raise ValueError("J samples must be finite and non-negative")
        if not math.isfinite(float(np.trapezoid(j, w))):
            raise ValueError("integral of J is not finite")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", j)

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``omega,J`` file with a header row."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header[:2] != ["omega", "J"]:
                raise ValueError(f"{path}: expected header 'omega,J', got {header!r}")
            rows = [(float(r[0]), float(r[1])) for r in reader if r and r[0].strip()]
        w, j = zip(*rows)
        return cls(np.array(w), np.array(j))

    @property
    def support(self):
        return float(self.omega[0]), float(self.omega[-1])

    def __call__(self, w):
        out = np.interp(np.asarray(w, dtype=float), self.omega, self.values, left=0.0, right=0.0)
        return out if np.ndim(out) else float(out)


SpectralDensity = Union[OhmicFamily, Semicircle, Tabulated]


def evaluate_j(sd: SpectralDensity, w):
    return sd(w)


def support(sd: SpectralDensity):
    return sd.support


def _tols(epsabs, epsrel):
    return (EPSABS if epsabs is None else epsabs), (EPSREL if epsrel is None else epsrel)


def _quad(f, a, b, epsabs=None, epsrel=None, **kw):
    epsabs, epsrel = _tols(epsabs, epsrel)
    kw.setdefault("limit", 500)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, full_output=1, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and err > 100 * max(epsabs, epsrel * abs(val)):
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge", err)
    return val


def _finite_range(sd):
    lo, hi = sd.support
    if isinstance(sd, OhmicFamily):
        hi = sd.omega_max
    return lo, hi


def integrate_weighted(sd: SpectralDensity, f: Callable, points=None,
                       epsabs=None, epsrel=None) -> float:
    """Return the integral of J(w) f(w) over the support for a real, regular f."""
    if isinstance(sd, Tabulated):
        return float(np.trapezoid(sd.values * f(sd.omega), sd.omega))
    epsabs, epsrel = _tols(epsabs, epsrel)
    lo, hi = _finite_range(sd)
    if isinstance(sd, Semicircle):
        pref = sd.prefactor
        if pref == 0.0:
            return 0.0
        return pref * _quad(f, lo, hi, epsabs / pref, epsrel, weight="alg", wvar=(0.5, 0.5))
    if sd.eta == 0.0:
        return 0.0
    pts = [p for p in (points or []) if lo < p < hi]
    pts += [sd.omega_c, 5 * sd.omega_c]
    return _quad(lambda w: sd(w) * f(w), lo, hi, epsabs, epsrel, points=sorted(set(pts)))


def total_weight(sd: SpectralDensity) -> float:
    """Integral of J over its support, equal to mu(0)."""
    return integrate_weighted(sd, lambda w: np.ones_like(w))


def _kernel_closed(sd, x):
    if isinstance(sd, OhmicFamily):
        return (sd.eta * sd.omega_c ** (1 - sd.s) * special.gamma(sd.s + 1)
                * (1.0 / sd.omega_c + 1j * x) ** (-(sd.s + 1)))
    # semicircle: g^2 exp(-i w_r x) J1(2 xi x)/(xi x)
    ax = np.abs(x)
    safe = np.where(ax > 0, ax, 1.0)
    ratio = np.where(ax > 0, special.j1(2 * sd.xi * safe) / (sd.xi * safe), 1.0)
    return sd.g**2 * np.exp(-1j * sd.omega_r * x) * ratio


def _kernel_quad(sd, x, epsabs, epsrel):
    if x == 0.0:
        return complex(integrate_weighted(sd, lambda w: np.ones_like(w), epsabs=epsabs, epsrel=epsrel))
    if isinstance(sd, OhmicFamily):
        lo, hi = _finite_range(sd)
        if sd.eta == 0.0:
            return 0j
        re = _quad(sd, lo, hi, epsabs, epsrel, weight="cos", wvar=x, limit=2000)
        im = _quad(sd, lo, hi, epsabs, epsrel, weight="sin", wvar=x, limit=2000)
        return complex(re, -im)
    re = integrate_weighted(sd, lambda w: np.cos(w * x), epsabs=epsabs, epsrel=epsrel)
    im = integrate_weighted(sd, lambda w: np.sin(w * x), epsabs=epsabs, epsrel=epsrel)
    return complex(re, -im)


def memory_kernel(sd: SpectralDensity, x, method="auto", epsabs=None, epsrel=None):
    """Correlation function mu(x) = int J(w) exp(-i w x) dw.

    ``method`` is ``"closed"`` (Ohmic power law, semicircle Bessel form),
    ``"quad"`` (adaptive quadrature of the defining integral) or ``"auto"``,
    which takes the closed form where one exists. Tabulated densities always
    use the trapezoid rule on their sample grid. Negative ``x`` returns the
    complex conjugate of mu(|x|).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(sd, Tabulated):
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        chunk = max(1, 2_000_000 // sd.omega.size)
        for i in range(0, flat.size, chunk):
            phase = np.exp(-1j * np.outer(flat[i:i + chunk], sd.omega))
            out[i:i + chunk] = np.trapezoid(phase * sd.values, sd.omega, axis=1)
        out = out.reshape(x.shape)
    elif method in ("auto", "closed"):
        out = np.asarray(_kernel_closed(sd, x), dtype=complex)
        if isinstance(sd, OhmicFamily) and sd.eta == 0.0:
            out = np.zeros_like(out)
    elif method == "quad":
        flat = x.ravel()
        vals = [_kernel_quad(sd, abs(v), epsabs, epsrel) for v in flat]
        out = np.array([v if xv >= 0 else v.conjugate() for v, xv in zip(vals, flat)])
        out = out.reshape(x.shape)
    else:
        raise ValueError(f"unknown kernel method {method!r}")
    return out if out.ndim else complex(out)


def cauchy_transform(sd: SpectralDensity, E: float, epsabs=None, epsrel=None) -> float:
    """Ordinary integral of J(w)/(w - E) for E outside or on the edge of the support."""
    lo, hi = sd.support
    if lo < E < hi:
        raise ValueError("E lies inside the support; use lamb_shift for the principal value")
    if isinstance(sd, Semicircle):
        epsabs, epsrel = _tols(epsabs, epsrel)
        pref = sd.prefactor
        if pref == 0.0:
            return 0.0
        if E == hi:
            # sqrt((w-lo)(hi-w))/(w-hi) = -sqrt(w-lo)/sqrt(hi-w)
            return -pref * _quad(lambda w: 1.0, lo, hi, epsabs / pref, epsrel,
                                 weight="alg", wvar=(0.5, -0.5))
        if E == lo:
            return pref * _quad(lambda w: 1.0, lo, hi, epsabs / pref, epsrel,
                                weight="alg", wvar=(-0.5, 0.5))
    if isinstance(sd, OhmicFamily) and E == 0.0:
        # J(w)/w in closed form avoids 0/0 near the edge
        if sd.eta == 0.0:
            return 0.0
        c = sd.eta * sd.omega_c ** (1 - sd.s)
        return _quad(lambda w: c * w ** (sd.s - 1) * math.exp(-w / sd.omega_c),
                     0.0, sd.omega_max, epsabs, epsrel, points=[sd.omega_c, 5 * sd.omega_c])
    if isinstance(sd, Tabulated) and (E == lo or E == hi):
        w, j = sd.omega, sd.values
        mask = w != E
        return float(np.trapezoid(np.where(mask, j / np.where(mask, w - E, 1.0), 0.0), w))
    dist = min(abs(E - lo), abs(E - hi))
    return integrate_weighted(sd, lambda w: 1.0 / (w - E), points=[lo + dist, lo + 10 * dist],
                              epsabs=epsabs, epsrel=epsrel)


def lamb_shift(sd: SpectralDensity, E: float, epsabs=None, epsrel=None) -> float:
    """Principal value P int J(w)/(E - w) dw.

    The same integral serves as the Born-Markov shift at E = w0 and as the
    band shift Delta_E in the branch-cut spectral function. Inside the
    support the pole is removed by subtracting J(E) and adding back the
    logarithm analytically.
    """
    lo, hi = sd.support
    if E == lo or E == hi:
        raise SingularEndpointError(f"principal value at support edge E = {E}")
    if not lo < E < hi:
        return -cauchy_transform(sd, E, epsabs, epsrel)
    if isinstance(sd, Tabulated):
        return _lamb_shift_tabulated(sd, E)
    if isinstance(sd, OhmicFamily):
        if sd.eta == 0.0:
            return 0.0
        hi = sd.omega_max
        if E >= hi:
            return -cauchy_transform(sd, E, epsabs, epsrel)
    jE = float(sd(E))

    def sub(w):
        if w == E:
            return 0.0
        return (sd(w) - jE) / (E - w)

    pts = [E]
    if isinstance(sd, OhmicFamily):
        pts += [p for p in (sd.omega_c, 5 * sd.omega_c) if p < hi]
    regular = _quad(sub, lo, hi, epsabs, epsrel, points=sorted(set(pts)))
    return regular + jE * math.log((E - lo) / (hi - E))


def _lamb_shift_tabulated(sd, E):
    w, j = sd.omega, sd.values
    k = int(np.searchsorted(w, E)) - 1
    slope = (j[k + 1] - j[k]) / (w[k + 1] - w[k])
    jE = float(sd(E))
    grid = np.insert(w, k + 1, E) if E not in w else w
    vals = np.interp(grid, w, j)
    diff = E - grid
    integrand = np.where(diff != 0, (vals - jE) / np.where(diff != 0, diff, 1.0), -slope)
    lo, hi = sd.support
    return float(np.trapezoid(integrand, grid)) + jE * math.log((E - lo) / (hi - E))


def residue_integral(sd: SpectralDensity, E: float, epsabs=None, epsrel=None) -> float:
    """Integral of J(w)/(E - w)**2 for E strictly outside the support.

    Within NEAR_EDGE of a support edge the substitution w = edge +- v**2
    tames the near-singular peak.
    """
    lo, hi = sd.support
    if lo <= E <= hi:
        raise ValueError("residue integral needs E strictly outside the support")
    if isinstance(sd, Tabulated):
        return float(np.trapezoid(sd.values / (E - sd.omega) ** 2, sd.omega))
    if isinstance(sd, OhmicFamily) and sd.eta == 0.0 or isinstance(sd, Semicircle) and sd.g == 0.0:
        return 0.0
    lo_f, hi_f = _finite_range(sd)
    if E < lo and lo - E < NEAR_EDGE:
        d = lo - E
        vmax = math.sqrt(hi_f - lo)
        f = lambda v: float(sd(lo + v * v)) * 2 * v / (d + v * v) ** 2
        pts = [p for p in (math.sqrt(d), 10 * math.sqrt(d), 1.0) if p < vmax]
        return _quad(f, 0.0, vmax, epsabs, epsrel, points=pts)
    if E > hi and E - hi < NEAR_EDGE:
        d = E - hi
        vmax = math.sqrt(hi - lo)
        f = lambda v: float(sd(hi - v * v)) * 2 * v / (d + v * v) ** 2
        pts = [p for p in (math.sqrt(d), 10 * math.sqrt(d)) if p < vmax]
        return _quad(f, 0.0, vmax, epsabs, epsrel, points=pts)
    dist = min(abs(E - lo), abs(E - hi))
    return integrate_weighted(sd, lambda w: 1.0 / (E - w) ** 2,
                              points=[lo + dist, lo + 10 * dist], epsabs=epsabs, epsrel=epsrel)
