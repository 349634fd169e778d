import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmteleport import lattice, propagator, spectrum
from nmteleport.lattice import ChainParams
from nmteleport.spectral import Semicircle


def test_three_site_matrix():
    H = lattice.build_single_excitation_hamiltonian(ChainParams(N=2, omega_r=1.0, xi=0.08, omega0=1.15, g=0.05))
    expected = np.array([[1.15, 0.05, 0.0], [0.05, 1.0, 0.08], [0.0, 0.08, 1.0]])
    assert np.array_equal(H, expected)


def test_decoupled_emitter_keeps_its_frequency():
    p = ChainParams(N=40, omega_r=1.0, xi=0.08, omega0=1.15, g=0.0)
    levels = lattice.excitation_spectrum(p)
    j = int(np.argmax(levels.weights))
    assert levels.energies[j] == pytest.approx(1.15, abs=1e-14)
    assert levels.weights[j] == pytest.approx(1.0, abs=1e-14)
    t = np.linspace(0, 100, 7)
    assert lattice.exact_u(p, t).u == pytest.approx(np.exp(-1.15j * t), abs=1e-12)


@pytest.mark.parametrize("N", [2, 7, 50])
def test_open_chain_eigenvalues(N):
    p = ChainParams(N=N, omega_r=1.0, xi=0.08, omega0=3.0, g=0.0)
    chain = np.sort(np.linalg.eigvalsh(lattice.build_single_excitation_hamiltonian(p)[1:, 1:]))
    j = np.arange(1, N + 1)
    expected = np.sort(1.0 + 2 * 0.08 * np.cos(j * math.pi / (N + 1)))
    assert chain == pytest.approx(expected, abs=1e-13)


def test_dispersion_examples():
    assert lattice.dispersion(1.0, 0.08, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert lattice.dispersion(1.0, 0.08, 0.0) == pytest.approx(1.16)
    k = np.linspace(0, math.pi, 1001)
    band = lattice.dispersion(1.0, 0.08, k)
    assert band.max() - band.min() == pytest.approx(4 * 0.08)


def test_initial_amplitude_and_normalisation():
    p = ChainParams(N=500, omega_r=1.0, xi=0.08, omega0=1.15, g=0.05)
    levels = lattice.excitation_spectrum(p)
    assert abs(levels.weights.sum() - 1) <= 1e-12
    assert lattice.exact_u(p, np.array([0.0]), spectrum=levels).u[0] == pytest.approx(1.0, abs=1e-12)


def test_revival_window_enforced():
    p = ChainParams(N=20, omega_r=1.0, xi=0.08, omega0=1.15, g=0.05)
    with pytest.raises(ValueError):
        lattice.exact_u(p, np.array([0.0, p.revival_time + 1]))
    assert lattice.exact_u(p, np.array([p.revival_time + 1]), allow_revivals=True).u.size == 1


def test_plateau_matches_residue():
    p = ChainParams(N=500, omega_r=1.0, xi=0.08, omega0=1.15, g=0.05)
    (bs,) = spectrum.find_bound_states(Semicircle(0.05, 0.08, 1.0), 1.15)
    t = np.linspace(0.5, 0.95, 501) * p.comparison_window
    assert np.mean(lattice.exact_u(p, t).abs_u) == pytest.approx(bs.Z, abs=1e-2)


def test_matches_continuum_solver_before_echoes():
    p = ChainParams(N=500, omega_r=1.0, xi=0.08, omega0=1.15, g=0.05)
    traj = propagator.solve_u(Semicircle(p.g, p.xi, p.omega_r), p.omega0, 1000.0, 0.05)
    exact = lattice.exact_u(p, traj.t)
    assert np.max(np.abs(exact.abs_u - traj.abs_u)) < 1e-3


@settings(max_examples=20, deadline=None)
@given(g=st.floats(0.0, 0.3), omega0=st.floats(0.5, 1.5), t=st.floats(0.0, 50.0))
def test_exact_evolution_is_unitary(g, omega0, t):
    p = ChainParams(N=30, omega_r=1.0, xi=0.08, omega0=omega0, g=g)
    assert lattice.exact_u(p, np.array([t])).abs_u[0] <= 1 + 1e-12
