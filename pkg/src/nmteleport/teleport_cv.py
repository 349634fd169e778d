"""Coherent-state teleportation through a dissipated two-mode squeezed vacuum.

Quadratures follow X = (a + a^dag)/2, P = (a - a^dag)/(2i), so the vacuum has
covariance I/4 and a coherent state |alpha> has mean (Re alpha, Im alpha).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class CvChannelCoeffs:
    a: float
    b: complex
    c: float
    x: float
    u: complex
    r: float


@dataclass(frozen=True)
class CvProtocolParams:
    r: float
    alpha: complex = 0j

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing r must be non-negative")


def _check(u, r):
    if abs(u) > 1 + 1e-12:
        raise DomainError(f"|u| = {abs(u)} exceeds 1")
    if r < 0:
        raise DomainError("squeezing r must be non-negative")


def ideal_fidelity_cv(r: float, omega0: float, t):
    t = np.asarray(t, dtype=float)
    return 0.5 / math.cosh(r) ** 2 / (1 - math.tanh(r) * np.cos(2 * omega0 * t))


def channel_coeffs_cv(u: complex, r: float) -> CvChannelCoeffs:
    _check(u, r)
    P = abs(u) ** 2
    th = math.tanh(r)
    x = 1.0 / (1 - (1 - P) ** 2 * th**2)
    return CvChannelCoeffs(a=x / math.cosh(r) ** 2, b=complex(-x * u * u * th),
                           c=x * P * (1 - P) * th**2, x=x, u=complex(u), r=r)


def fidelity_from_coeffs(co: CvChannelCoeffs) -> float:
    denom = 1 + co.b.real - co.c
    if denom <= 0:
        raise DomainError(f"unphysical channel coefficients (1 + Re b - c = {denom})")
    return co.a / 2 / denom


def _coeff_arrays(u, r):
    u = np.asarray(u, dtype=complex)
    if np.any(np.abs(u) > 1 + 1e-12):
        raise DomainError("|u| exceeds 1")
    if r < 0:
        raise DomainError("squeezing r must be non-negative")
    P = np.abs(u) ** 2
    th = math.tanh(r)
    x = 1.0 / (1 - (1 - P) ** 2 * th**2)
    return x / math.cosh(r) ** 2, -x * u * u * th, x * P * (1 - P) * th**2


def avg_fidelity_cv(u, r: float):
    """Average fidelity for channel amplitude ``u`` (scalar or array)."""
    if np.ndim(u) == 0:
        return fidelity_from_coeffs(channel_coeffs_cv(complex(u), r))
    a, b, c = _coeff_arrays(u, r)
    denom = 1 + b.real - c
    if np.any(denom <= 0):
        raise DomainError("unphysical channel coefficients (1 + Re b - c <= 0)")
    return a / 2 / denom


def max_phase_fidelity_cv(abs_u, r: float):
    """Fidelity maximised over the phase of u at fixed |u|: a / (2(1 - |b| - c))."""
    a, b, c = _coeff_arrays(abs_u, r)
    return a / 2 / (1 - np.abs(b) - c)


def bma_fidelity_cv(kappa: float, omega0: float, r: float, t):
    t = np.asarray(t, dtype=float)
    return 1.0 / (2 + math.sinh(2 * r) * np.exp(-2 * kappa * t) * (math.tanh(r) - np.cos(2 * omega0 * t)))


def steady_fidelity_cv(bound_state, r: float, t):
    t = np.asarray(t, dtype=float)
    Z = bound_state.Z
    return 1.0 / (2 + math.sinh(2 * r) * Z**2 * (math.tanh(r) - np.cos(2 * bound_state.E_b * t)))


def steady_max_fidelity_cv(Z: float, r: float) -> float:
    return 1.0 / (2 - Z**2 * (1 - math.exp(-2 * r)))


# -- outcome-integral oracle ------------------------------------------------

def _quadrature_transform(n):
    """Rows map (a_1..a_n, a_1^dag..a_n^dag) to (X_1, P_1, ..., X_n, P_n)."""
    T = np.zeros((2 * n, 2 * n), dtype=complex)
    for l in range(n):
        T[2 * l, l] = T[2 * l, n + l] = 0.5
        T[2 * l + 1, l] = -0.5j
        T[2 * l + 1, n + l] = 0.5j
    return T


def _three_mode_moments(u, r, alpha):
    """Mean and covariance of (X1, P1, X2, P2, X3, P3) before Alice's beam splitter.

    Mode 1 carries |alpha>. Modes 2 and 3 start in the squeezed vacuum
    exp[r(a2 a3 - a2^dag a3^dag)]|00> and each loses amplitude through
    a -> u a + sqrt(1 - |u|^2) e with a vacuum environment e.
    """
    n = 3
    occ = abs(u) ** 2 * math.sinh(r) ** 2
    pair = u * u * (-math.sinh(r) * math.cosh(r))  # <a2 a3>
    sym = np.zeros((2 * n, 2 * n), dtype=complex)  # (1/2)<{A_i, A_j}>
    for l, nl in enumerate((0.0, occ, occ)):
        sym[l, n + l] = sym[n + l, l] = nl + 0.5
    sym[1, 2] = sym[2, 1] = pair
    sym[n + 1, n + 2] = sym[n + 2, n + 1] = np.conj(pair)
    T = _quadrature_transform(n)
    cov = (T @ sym @ T.T).real
    mean = np.array([alpha.real, alpha.imag, 0.0, 0.0, 0.0, 0.0])
    return mean, cov


def _beam_splitter():
    """a1 -> (a1 + a2)/sqrt2, a2 -> (a2 - a1)/sqrt2, acting on quadrature pairs."""
    s = 1 / math.sqrt(2)
    B = np.eye(6)
    B[0:2, 0:2] = s * np.eye(2)
    B[0:2, 2:4] = s * np.eye(2)
    B[2:4, 0:2] = -s * np.eye(2)
    B[2:4, 2:4] = s * np.eye(2)
    return B


def _coherent_overlap(mean, cov, target):
    """<beta| rho |beta> for a one-mode Gaussian rho (vectorised over ``mean``)."""
    W = cov + np.eye(2) / 4
    Wi = np.linalg.inv(W)
    d = mean - target
    return np.exp(-0.5 * np.einsum("...i,ij,...j->...", d, Wi, d)) / (2 * math.sqrt(np.linalg.det(W)))


def oracle_avg_fidelity_cv(u: complex, r: float, alpha: complex = 0j,
                           half_width: float | None = None, points: int = 201,
                           tail_tol: float = 1e-10) -> float:
    """Average fidelity by integrating over the homodyne outcomes (x1, p2).

    For each outcome the conditional state of Bob's mode is Gaussian (exact
    Gaussian conditioning on the measured quadratures), displaced by sqrt2 z
    with z = x1 - i p2, and overlapped with |alpha>. The outcome density times
    this fidelity is integrated with the trapezoid rule on a square grid
    centred on the outcome mean. ``half_width`` defaults to
    max(5 + 2|alpha|, 10 sigma), sigma the largest outcome standard deviation.
    """
    _check(u, r)
    alpha = complex(alpha)
    mean, cov = _three_mode_moments(u, r, alpha)
    B = _beam_splitter()
    mean, cov = B @ mean, B @ cov @ B.T
    meas, bob = [0, 3], [4, 5]  # X1 and P2 after the beam splitter; Bob's mode 3
    Vm = cov[np.ix_(meas, meas)]
    C = cov[np.ix_(bob, meas)]
    gain = C @ np.linalg.inv(Vm)
    cond_cov = cov[np.ix_(bob, bob)] - gain @ C.T

    sigma = math.sqrt(np.linalg.eigvalsh(Vm).max())
    L = half_width if half_width is not None else max(5 + 2 * abs(alpha), 10 * sigma)
    xs = mean[0] + np.linspace(-L, L, points)
    ps = mean[3] + np.linspace(-L, L, points)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    dev = np.stack([X - mean[0], P - mean[3]], axis=-1)
    Vmi = np.linalg.inv(Vm)
    density = np.exp(-0.5 * np.einsum("...i,ij,...j->...", dev, Vmi, dev)) / (
        2 * math.pi * math.sqrt(np.linalg.det(Vm)))

    # z = x1 - i p2, displacement by sqrt2 z shifts (X, P) by (sqrt2 x1, -sqrt2 p2)
    out_mean = mean[bob] + dev @ gain.T + math.sqrt(2) * np.stack([X, -P], axis=-1)
    fid = _coherent_overlap(out_mean, cond_cov, np.array([alpha.real, alpha.imag]))

    mass = np.trapezoid(np.trapezoid(density, ps, axis=1), xs)
    if abs(1 - mass) > tail_tol:
        warnings.warn(f"outcome grid misses probability mass {1 - mass:.3e}", RuntimeWarning, stacklevel=2)
    return float(np.trapezoid(np.trapezoid(density * fid, ps, axis=1), xs))
