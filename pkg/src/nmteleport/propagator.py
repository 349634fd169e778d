"""The channel propagator u(t) and the master-equation coefficients built on it.

u obeys  u' + i w0 u + int_0^t mu(t - s) u(s) ds = 0,  u(0) = 1.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import spectral
from .errors import CoefficientSingularityError, DomainError, SolverInstabilityError


@dataclass(frozen=True, eq=False)
class UTrajectory:
    t: np.ndarray
    u: np.ndarray
    h: float
    scheme: str
    kernel_evaluations: int = 0
    wall_time: float = field(default=0.0, compare=False)

    def __len__(self):
        return self.t.size

    @property
    def abs_u(self):
        return np.abs(self.u)


@dataclass(frozen=True, eq=False)
class MasterEqCoeffs:
    """Decay rate Gamma(t) = -Re(u'/u) and frequency Omega(t) = -Im(u'/u) on a grid."""

    t: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray


def _instability_bound(h, mu0, omega0):
    return 1.0 + max(1e-12, 10.0 * h * h * max(1.0, abs(mu0), omega0 * omega0))


def solve_u(sd, omega0: float, T: float, h: float, frame: float | None = None,
            kernel_method: str = "auto") -> UTrajectory:
    """Integrate the Volterra equation for u on t = 0, h, ..., T.

    Product trapezoid rule for the memory integral and the trapezoid rule in
    time; the implicit step is linear so it is solved exactly. The equation is
    integrated for v = u exp(i frame t), which removes the free rotation at the
    frame frequency (default ``omega0``) and is undone on output.
    """
    if T <= 0 or h <= 0:
        raise ValueError("T and h must be positive")
    M = int(round(T / h))
    if M < 2 or not math.isclose(M * h, T, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("T/h must be an integer >= 2")
    frame = omega0 if frame is None else frame
    start = time.perf_counter()

    t = np.arange(M + 1) * h
    mu = np.asarray(spectral.memory_kernel(sd, t, method=kernel_method), dtype=complex)
    if not np.all(np.isfinite(mu)):
        bad = int(np.flatnonzero(~np.isfinite(mu))[0])
        raise FloatingPointError(f"non-finite memory kernel at t = {t[bad]}")
    k = mu * np.exp(1j * frame * t)
    krev = k[::-1].copy()
    d = 1j * (omega0 - frame)

    v = np.zeros(M + 1, dtype=complex)
    v[0] = 1.0
    lhs = 1.0 + 0.5 * h * d + 0.25 * h * h * k[0]
    keep = 1.0 - 0.5 * h * d
    hist = 0.0 + 0.0j  # memory integral at the current time
    for n in range(M):
        # sum_{j=1}^{n} k[n+1-j] v[j]
        s = np.dot(krev[M - n:M], v[1:n + 1]) if n else 0.0
        partial = 0.5 * k[n + 1] * v[0] + s
        v[n + 1] = (keep * v[n] - 0.5 * h * hist - 0.5 * h * h * partial) / lhs
        hist = h * (partial + 0.5 * k[0] * v[n + 1])

    u = v * np.exp(-1j * frame * t)
    bound = _instability_bound(h, k[0].real, omega0)
    mod = np.abs(u)
    if np.any(mod > bound) or not np.all(np.isfinite(u)):
        idx = int(np.argmax(np.where(np.isfinite(mod), mod, np.inf)))
        raise SolverInstabilityError(idx, t[idx], mod[idx], bound)
    return UTrajectory(t=t, u=u, h=h, scheme="trapezoid-product-integration",
                       kernel_evaluations=M + 1, wall_time=time.perf_counter() - start)


def markov_rate(sd, omega0: float) -> float:
    """kappa = pi J(w0); w0 must lie strictly inside the support."""
    lo, hi = sd.support
    if not lo < omega0 < hi:
        raise DomainError(f"w0 = {omega0} is outside the support ({lo}, {hi}); Markov rate undefined")
    return math.pi * float(sd(omega0))


def bma_u(sd, omega0: float, t):
    """Born-Markov propagator exp(-[kappa + i(w0 + Delta_w0)] t)."""
    kappa = markov_rate(sd, omega0)
    shift = spectral.lamb_shift(sd, omega0)
    t = np.asarray(t, dtype=float)
    out = np.exp(-(kappa + 1j * (omega0 + shift)) * t)
    return out if out.ndim else complex(out)


def bma_trajectory(sd, omega0: float, T: float, h: float) -> UTrajectory:
    M = int(round(T / h))
    t = np.arange(M + 1) * h
    return UTrajectory(t=t, u=np.asarray(bma_u(sd, omega0, t)), h=h, scheme="born-markov")


class BranchCut:
    """Continuum spectral function and its Fourier integral.

    A(E) = J(E) / [(E - w0 - Delta_E)^2 + (pi J(E))^2] is tabulated once on
    nodes clustered at the band edges (and around w0 for unbounded bands),
    splined, then integrated against exp(-iEt) with Gauss-Legendre panels
    narrow enough to resolve the oscillation.
    """

    def __init__(self, sd, omega0: float, n_nodes: int = 801, order: int = 8):
        self.sd = sd
        self.omega0 = omega0
        self.order = order
        lo, hi = spectral._finite_range(sd)
        theta = math.pi * (np.arange(n_nodes) + 0.5) / n_nodes
        nodes = lo + (hi - lo) * 0.5 * (1 - np.cos(theta))
        if math.isinf(sd.support[1]):
            span = 4 * max(abs(omega0), 1.0)
            theta2 = math.pi * (np.arange(n_nodes // 2) + 0.5) / (n_nodes // 2)
            nodes = np.concatenate([nodes, lo + span * 0.5 * (1 - np.cos(theta2))])
        nodes = np.unique(nodes[(nodes > lo) & (nodes < sd.support[1])])
        jv = np.asarray(sd(nodes), dtype=float)
        shift = np.array([spectral.lamb_shift(sd, e) if j > 0 else 0.0 for e, j in zip(nodes, jv)])
        denom = (nodes - omega0 - shift) ** 2 + (math.pi * jv) ** 2
        dens = np.where(jv > 0, jv / np.where(denom > 0, denom, 1.0), 0.0)
        xs = np.concatenate([[lo], nodes])
        ys = np.concatenate([[0.0], dens])
        if not math.isinf(sd.support[1]):
            xs = np.append(xs, hi)
            ys = np.append(ys, 0.0)
        keep = ys > 1e-14 * ys.max() if ys.max() > 0 else np.ones_like(ys, dtype=bool)
        last = int(np.flatnonzero(keep)[-1]) if keep.any() else 1
        self.nodes = xs[:last + 2] if last + 2 <= xs.size else xs
        self.values = ys[:self.nodes.size]
        self._spline = CubicSpline(self.nodes, self.values)

    @property
    def weight(self) -> float:
        """Total continuum weight, 1 - Z by the sum rule."""
        return float(self._spline.integrate(self.nodes[0], self.nodes[-1]))

    def __call__(self, t: float) -> complex:
        # panels follow the spline knots, split so each spans at most pi/|t|
        lengths = np.diff(self.nodes)
        nsub = np.maximum(1, np.ceil(lengths * abs(t) / math.pi)).astype(int)
        owner = np.repeat(np.arange(lengths.size), nsub)
        offset = np.arange(owner.size) - np.repeat(np.cumsum(nsub) - nsub, nsub)
        width = lengths[owner] / nsub[owner]
        left = self.nodes[owner] + width * offset
        x, w = np.polynomial.legendre.leggauss(self.order)
        half = 0.5 * width
        mid = left + half
        E = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        W = (half[:, None] * w[None, :]).ravel()
        vals = np.clip(self._spline(E), 0.0, None)
        return complex(np.sum(W * vals * np.exp(-1j * E * t)))


def asymptotic_u(sd, omega0: float, bound_state, t, branch: BranchCut | None = None):
    """Bound-state pole plus branch-cut integral for u(t).

    ``bound_state`` may be None (no isolated root) or a BoundState; pass a
    prebuilt ``branch`` to reuse the tabulated spectral function. A bath with
    zero total weight leaves the emitter decoupled, so u = exp(-i omega0 t).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if spectral.total_weight(sd) == 0:
        out = np.exp(-1j * omega0 * t_arr)
        return out if np.ndim(t) else complex(out[0])
    branch = branch or BranchCut(sd, omega0)
    out = np.array([branch(tv) for tv in t_arr], dtype=complex)
    if bound_state is not None:
        out += bound_state.Z * np.exp(-1j * bound_state.E_b * t_arr)
    return out if np.ndim(t) else complex(out[0])


def master_eq_coeffs(traj: UTrajectory) -> MasterEqCoeffs:
    if len(traj) < 3:
        raise ValueError("need at least three samples")
    mod = np.abs(traj.u)
    small = np.flatnonzero(mod[1:-1] < 1e-12)
    if small.size:
        i = int(small[0]) + 1
        raise CoefficientSingularityError(f"|u| < 1e-12 at t = {traj.t[i]}")
    du = np.gradient(traj.u, traj.h, edge_order=2)
    ratio = du / traj.u
    return MasterEqCoeffs(t=traj.t, gamma=-ratio.real, omega=-ratio.imag)
