"""Exact single-excitation dynamics of an emitter coupled to the end of a resonator chain."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .propagator import UTrajectory


@dataclass(frozen=True)
class ChainParams:
    N: int
    omega_r: float
    xi: float
    omega0: float
    g: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("chain needs N >= 2 resonators")
        if self.xi <= 0:
            raise ValueError("hopping xi must be positive")
        if self.g < 0:
            raise ValueError("coupling g must be non-negative")

    @property
    def revival_time(self):
        """First return of the fastest wavepacket from the far end of the chain."""
        return 2 * self.N / (2 * self.xi)

    @property
    def comparison_window(self):
        return self.N / (2 * self.xi)


@dataclass(frozen=True, eq=False)
class ExcitationSpectrum:
    energies: np.ndarray
    weights: np.ndarray  # |<system|E_j>|^2


def dispersion(omega_r: float, xi: float, k):
    """Chain band w_k = w_r + 2 xi cos k."""
    return omega_r + 2 * xi * np.cos(k)


def build_single_excitation_hamiltonian(p: ChainParams) -> np.ndarray:
    """Dense (N+1)x(N+1) matrix in the basis (system, site 1, ..., site N)."""
    n = p.N + 1
    H = np.zeros((n, n))
    H[0, 0] = p.omega0
    idx = np.arange(1, n)
    H[idx, idx] = p.omega_r
    off = np.full(p.N, p.xi)
    off[0] = p.g
    H[np.arange(n - 1), np.arange(1, n)] = off
    H[np.arange(1, n), np.arange(n - 1)] = off
    return H


def excitation_spectrum(p: ChainParams) -> ExcitationSpectrum:
    E, V = np.linalg.eigh(build_single_excitation_hamiltonian(p))
    return ExcitationSpectrum(energies=E, weights=np.abs(V[0]) ** 2)


def exact_u(p: ChainParams, t, allow_revivals: bool = False,
            spectrum: ExcitationSpectrum | None = None) -> UTrajectory:
    """u(t) = sum_j |x_j|^2 exp(-i E_j t) from the full eigendecomposition."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("need a non-empty 1-d time grid")
    if not allow_revivals and t.max() >= p.revival_time:
        raise ValueError(f"t = {t.max()} reaches the finite-chain revival time {p.revival_time}")
    levels = spectrum or excitation_spectrum(p)
    u = np.empty(t.size, dtype=complex)
    chunk = max(1, 4_000_000 // levels.energies.size)
    for i in range(0, t.size, chunk):
        u[i:i + chunk] = np.exp(-1j * np.outer(t[i:i + chunk], levels.energies)) @ levels.weights
    h = float(t[1] - t[0]) if t.size > 1 else math.nan
    return UTrajectory(t=t, u=u, h=h, scheme="exact-diagonalization")

