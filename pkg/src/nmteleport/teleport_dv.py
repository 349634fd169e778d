"""Qubit teleportation through a channel whose two halves decay with amplitude u.

Single-qubit basis order is (e, g); two-qubit matrices use (ee, eg, ge, gg).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

S2 = 1 / math.sqrt(2)

BELL_LABELS = ("Phi+", "Phi-", "Psi+", "Psi-")
# coefficient matrices c[i, j] of |i j> in each Bell state
BELL = np.array([
    [[S2, 0], [0, S2]],
    [[S2, 0], [0, -S2]],
    [[0, S2], [S2, 0]],
    [[0, S2], [-S2, 0]],
], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
CORRECTIONS = np.array([np.eye(2), SIGMA_Z, SIGMA_X, -1j * SIGMA_Y])


@dataclass(frozen=True)
class QubitInputState:
    theta: float
    phi: float = 0.0

    @property
    def amplitudes(self):
        return np.array([math.cos(self.theta / 2),
                         math.sin(self.theta / 2) * complex(math.cos(self.phi), math.sin(self.phi))])

    @property
    def density(self):
        a = self.amplitudes
        return np.outer(a, a.conj())


@dataclass(frozen=True, eq=False)
class DvChannelState:
    rho: np.ndarray
    u: complex


@dataclass(frozen=True, eq=False)
class TeleportOutcome:
    k: int
    label: str
    probability: float
    rho_out: np.ndarray
    fidelity: float  # nan when the outcome has zero probability


def _check_u(u):
    if abs(u) > 1 + 1e-12:
        raise DomainError(f"|u| = {abs(u)} exceeds 1")


def ideal_fidelity_dv(omega0: float, t):
    return (2 + np.cos(2 * omega0 * np.asarray(t, dtype=float))) / 3


def channel_state_dv(u: complex) -> DvChannelState:
    """Two-qubit state after both halves of (|ee> + |gg>)/sqrt2 decay with amplitude u."""
    _check_u(u)
    P = abs(u) ** 2
    single = np.diag([P, 1 - P]).astype(complex)
    rho = np.kron(single, single)
    rho[3, 3] += 1.0
    rho[0, 3] += u * u
    rho[3, 0] += np.conj(u * u)
    return DvChannelState(rho=rho / 2, u=complex(u))


def avg_fidelity_dv(u):
    """Average teleportation fidelity as a function of the propagator value u."""
    u = np.asarray(u, dtype=complex)
    P = np.abs(u) ** 2
    out = (2 + P * (P - 1) + np.real(u * u)) / 3
    return out if out.ndim else float(out)


def bma_fidelity_dv(kappa: float, omega0: float, t):
    t = np.asarray(t, dtype=float)
    decay = np.exp(-2 * kappa * t)
    return (2 + decay * (decay - 2 * np.sin(omega0 * t) ** 2)) / 3


def steady_fidelity_dv(bound_state, t):
    """Long-time fidelity sustained by a bound state (E_b, Z)."""
    Z = bound_state.Z
    t = np.asarray(t, dtype=float)
    return (2 + Z**2 * (Z**2 - 2 * np.sin(bound_state.E_b * t) ** 2)) / 3


def steady_max_fidelity_dv(Z: float) -> float:
    return (2 + Z**4) / 3


def _bob_states(rho1, rho23):
    """Unnormalised, corrected output of Bob for each Bell outcome.

    ``rho1`` has shape (..., 2, 2); the result has shape (..., 4, 2, 2).
    """
    r23 = rho23.reshape(2, 2, 2, 2)  # [j, k, j', k'] for qubits 2 and 3
    raw = np.einsum("bij,...ia,jkcl,bac->...bkl", BELL.conj(), rho1, r23, BELL, optimize=True)
    return np.einsum("bkm,...bmn,bln->...bkl", CORRECTIONS, raw, CORRECTIONS.conj(), optimize=True)


def simulate_teleport_dv(u: complex, state: QubitInputState) -> list:
    """Bell measurement, classical message and correction on the full three-qubit state."""
    chan = channel_state_dv(u)
    rho1 = state.density
    out = _bob_states(rho1, chan.rho)
    phi = state.amplitudes
    results = []
    for k in range(4):
        p = float(np.real(np.trace(out[k])))
        if p > 1e-15:
            rho_out = out[k] / p
            fid = float(np.real(phi.conj() @ rho_out @ phi))
        else:
            rho_out = np.full((2, 2), np.nan, dtype=complex)
            fid = math.nan
        results.append(TeleportOutcome(k=k + 1, label=BELL_LABELS[k], probability=p,
                                       rho_out=rho_out, fidelity=fid))
    return results


def _weighted_fidelity(u, amps):
    """sum_k P_k F_k for a batch of pure inputs with amplitude rows ``amps``."""
    chan = channel_state_dv(u)
    rho1 = amps[:, :, None] * amps[:, None, :].conj()
    out = _bob_states(rho1, chan.rho)
    # P_k F_k = <phi| unnormalised_k |phi>
    return np.real(np.einsum("ni,nbij,nj->n", amps.conj(), out, amps))


def oracle_avg_fidelity_dv(u: complex, n_theta: int = 32, n_phi: int = 32) -> float:
    """Average fidelity from the protocol simulation on a product Bloch-sphere rule.

    Gauss-Legendre in cos(theta) times the periodic trapezoid rule in phi.
    """
    if n_theta < 8 or n_phi < 8:
        raise ValueError("need at least 8 nodes per angle")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    T, Ph = np.meshgrid(theta, phi, indexing="ij")
    amps = np.stack([np.cos(T / 2), np.sin(T / 2) * np.exp(1j * Ph)], axis=-1).reshape(-1, 2)
    weights = (np.repeat(w, n_phi) / 2) / n_phi
    return float(np.sum(weights * _weighted_fidelity(u, amps)))


def monte_carlo_avg_fidelity_dv(u: complex, samples: int = 10_000, rng=None):
    """Monte Carlo estimate over Haar-random inputs; returns (mean, standard error)."""
    rng = np.random.default_rng(rng)
    cos_t = rng.uniform(-1, 1, samples)
    phi = rng.uniform(0, 2 * math.pi, samples)
    theta = np.arccos(cos_t)
    amps = np.stack([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phi)], axis=-1)
    vals = _weighted_fidelity(u, amps)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))
