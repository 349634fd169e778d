"""Acceptance gate: one printed PASS/FAIL line per criterion, at the contract tolerances."""
import math
import os
import time

import numpy as np
import pytest

from nmteleport import lattice, propagator, spectrum
from nmteleport import teleport_cv as cv
from nmteleport import teleport_dv as dv
from nmteleport.cli import _local_maxima
from nmteleport.spectral import OhmicFamily, Semicircle

ETA, OMEGA0, H, T = 0.2, 1.0, 1e-3, 100.0
CAVITY_OMEGA0, CAVITY_XI, CAVITY_OMEGA_R = 1.15, 0.08, 1.0


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def ohmic(omega_c):
    return OhmicFamily(eta=ETA, s=1.0, omega_c=omega_c)


def cavity(g):
    return Semicircle(g=g, xi=CAVITY_XI, omega_r=CAVITY_OMEGA_R)


@pytest.fixture(scope="session")
def solves():
    """Acceptance-grid trajectories for the two reference cutoffs, with wall times."""
    out = {}
    for wc in (10.0, 4.0):
        start = time.perf_counter()
        traj = propagator.solve_u(ohmic(wc), OMEGA0, T, H)
        out[wc] = (traj, time.perf_counter() - start)
    return out


@pytest.fixture(scope="session")
def strong_state():
    (bs,) = spectrum.find_bound_states(ohmic(10.0), OMEGA0)
    return bs


def late_window(traj):
    return (traj.t >= 80) & (traj.t <= 100)


def late_maxima(t, series):
    idx = _local_maxima(series)
    return series[idx[(t[idx] >= 80) & (t[idx] <= 100)]]


def test_criterion_01_bound_state_threshold(report):
    start = time.perf_counter()
    grid = np.linspace(1.0, 10.0, 181)  # 0.05 spacing: 1% of the expected onset
    sweep = spectrum.spectrum_sweep(ohmic, OMEGA0, grid, jobs=os.cpu_count() or 1)
    bracket = sweep.threshold_bracket()
    onset = spectrum.locate_threshold(ohmic, OMEGA0, *bracket, tol=1e-4)
    elapsed = time.perf_counter() - start
    ok = bracket[0] <= 5.0 <= bracket[1] and abs(onset - 5.0) <= 0.05 and elapsed <= 10.0
    report(1, ok, f"onset omega_c = {onset:.5f} (grid bracket {bracket}), target 5 +- 0.05, "
                  f"runtime {elapsed:.2f} s <= 10 s")


def test_criterion_02_decoherence_plateau(report, solves, strong_state):
    strong, t_strong = solves[10.0]
    weak, t_weak = solves[4.0]
    rel = abs(abs(strong.u[-1]) - strong_state.Z) / strong_state.Z
    final_weak = abs(weak.u[-1])
    ok = rel <= 0.02 and final_weak <= 0.02 and max(t_strong, t_weak) <= 60
    report(2, ok, f"|u(100)| = {abs(strong.u[-1]):.6f} vs Z = {strong_state.Z:.6f} (rel {rel:.2e} <= 2e-2); "
                  f"omega_c = 4: |u(100)| = {final_weak:.2e} <= 2e-2; solve times {t_strong:.1f} s, {t_weak:.1f} s")


def test_criterion_03_qubit_steady_fidelity(report, solves, strong_state):
    strong, _ = solves[10.0]
    weak, _ = solves[4.0]
    target = dv.steady_max_fidelity_dv(strong_state.Z)
    peaks = late_maxima(strong.t, dv.avg_fidelity_dv(strong.u))
    rel = np.max(np.abs(peaks - target)) / target
    weak_dev = np.max(np.abs(dv.avg_fidelity_dv(weak.u)[late_window(weak)] - 2 / 3))
    ok = peaks.size > 0 and rel <= 0.01 and weak_dev <= 1e-2
    report(3, ok, f"{peaks.size} maxima in [80, 100] vs (2 + Z^4)/3 = {target:.6f}: worst rel {rel:.2e} <= 1e-2; "
                  f"omega_c = 4: max |F - 2/3| = {weak_dev:.2e} <= 1e-2")


def test_criterion_04_coherent_state_steady_fidelity(report, solves, strong_state):
    r = 2.0
    strong, _ = solves[10.0]
    weak, _ = solves[4.0]
    target = cv.steady_max_fidelity_cv(strong_state.Z, r)
    peaks = late_maxima(strong.t, cv.avg_fidelity_cv(strong.u, r))
    rel = np.max(np.abs(peaks - target)) / target
    weak_dev = np.max(np.abs(cv.avg_fidelity_cv(weak.u, r)[late_window(weak)] - 0.5))
    ok = peaks.size > 0 and rel <= 0.01 and weak_dev <= 1e-2
    report(4, ok, f"{peaks.size} maxima in [80, 100] vs 1/(2 - Z^2(1 - e^-4)) = {target:.6f}: worst rel {rel:.2e}"
                  f" <= 1e-2; omega_c = 4: max |F - 1/2| = {weak_dev:.2e} <= 1e-2")


def test_criterion_05_markovian_limits(report):
    omega0, r = 1.0, 2.0
    kappa = 0.37
    t_late = np.linspace(10 / kappa, 10 / kappa + 2 * math.pi, 50)  # kappa t >= 10 across a full period
    dv_late = np.max(np.abs(dv.bma_fidelity_dv(kappa, omega0, t_late) - 2 / 3))
    cv_late = np.max(np.abs(cv.bma_fidelity_cv(kappa, omega0, r, t_late) - 0.5))
    t = np.linspace(0, 50, 5001)
    dv_ideal = np.max(np.abs(dv.bma_fidelity_dv(0.0, omega0, t) - dv.ideal_fidelity_dv(omega0, t)))
    cv_ideal = np.max(np.abs(cv.bma_fidelity_cv(0.0, omega0, r, t) - cv.ideal_fidelity_cv(r, omega0, t)))
    ok = dv_late <= 1e-7 and cv_late <= 1e-7 and dv_ideal <= 1e-12 and cv_ideal <= 1e-12
    report(5, ok, f"kappa t = 10: |F_dv - 2/3| = {dv_late:.1e}, |F_cv - 1/2| = {cv_late:.1e} (<= 1e-7); "
                  f"kappa = 0 vs ideal: {dv_ideal:.1e}, {cv_ideal:.1e} (<= 1e-12)")


def test_criterion_06_ideal_maxima(report):
    n = np.arange(0, 40)
    t = n * math.pi
    dv_err = np.max(np.abs(dv.ideal_fidelity_dv(1.0, t) - 1))
    cv_max = float(np.max(cv.ideal_fidelity_cv(2.0, 1.0, t)))
    cv_err = abs(cv_max - 1 / (1 + math.exp(-4)))
    dense = np.max(cv.ideal_fidelity_cv(2.0, 1.0, np.linspace(0, 2 * math.pi, 100001)))
    ok = dv_err <= 1e-15 and cv_err <= 1e-15 and abs(cv_max - 0.982014) < 5e-7 and dense <= cv_max + 1e-15
    report(6, ok, f"DV at t = n pi: max |F - 1| = {dv_err:.1e}; CV maximum {cv_max:.9f} "
                  f"= 1/(1 + e^-4) to {cv_err:.1e}")


def test_criterion_07_oracle_equivalences(report):
    rng = np.random.default_rng(7)

    def disk(n):
        return np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n))

    start = time.perf_counter()
    us = disk(100)
    dv_err = max(abs(dv.oracle_avg_fidelity_dv(u, 32, 32) - dv.avg_fidelity_dv(u)) for u in us)
    dv_time = time.perf_counter() - start

    pairs = list(zip(disk(20), 2 * rng.random(20)))
    cv_err = max(abs(cv.oracle_avg_fidelity_cv(u, r) - cv.avg_fidelity_cv(u, r)) for u, r in pairs)
    alphas = (0j, 1 + 0.5j, -1.5j, 2.0)
    cv_spread = max(np.ptp([cv.oracle_avg_fidelity_cv(u, r, a) for a in alphas]) for u, r in pairs)

    g = 0.05  # above the critical coupling
    p = lattice.ChainParams(N=500, omega_r=CAVITY_OMEGA_R, xi=CAVITY_XI, omega0=CAVITY_OMEGA0, g=g)
    h = 0.05
    horizon = h * math.floor(0.95 * p.comparison_window / h)
    traj = propagator.solve_u(cavity(g), CAVITY_OMEGA0, horizon, h)
    levels = lattice.excitation_spectrum(p)
    lat_err = np.max(np.abs(lattice.exact_u(p, traj.t, spectrum=levels).abs_u - traj.abs_u))
    (bs,) = spectrum.find_bound_states(cavity(g), CAVITY_OMEGA0)
    t_late = np.linspace(0.5, 0.95, 2001) * p.comparison_window
    plateau = float(np.mean(lattice.exact_u(p, t_late, spectrum=levels).abs_u))

    ok = (dv_err <= 1e-6 and dv_time <= 30 and cv_err <= 1e-6 and cv_spread <= 1e-6
          and lat_err <= 1e-3 and abs(plateau - bs.Z) <= 1e-2)
    report(7, ok, f"DV oracle {dv_err:.1e} ({dv_time:.1f} s); CV oracle {cv_err:.1e}, alpha spread "
                  f"{cv_spread:.1e}; lattice |u| deviation {lat_err:.1e} up to t = {horizon:.0f}, "
                  f"plateau {plateau:.5f} vs Z = {bs.Z:.5f}")


def test_criterion_08_cavity_residue_jump(report):
    grid = np.linspace(0.0, 0.12, 121)
    sweep = spectrum.spectrum_sweep(cavity, CAVITY_OMEGA0, grid, jobs=os.cpu_count() or 1)
    z = sweep.z_branch()
    lo, hi = sweep.threshold_bracket()
    g_c = spectrum.locate_threshold(cavity, CAVITY_OMEGA0, lo, hi, tol=1e-3)
    # edge condition omega0 + g^2/xi = omega_r + 2 xi, independent of the sweep
    g_edge = math.sqrt(CAVITY_XI * (CAVITY_OMEGA_R + 2 * CAVITY_XI - CAVITY_OMEGA0))
    zero_below = bool(np.all(z[grid <= lo] == 0.0))
    positive_above = bool(np.all(z[grid >= hi] > 0.0))
    ok = zero_below and positive_above and g_c > 0 and abs(g_c - g_edge) <= 1e-3
    report(8, ok, f"Z = 0 for g <= {lo:.3f}, Z >= {z[grid >= hi].min():.3f} for g >= {hi:.3f}; "
                  f"critical g = {g_c:.5f} vs edge condition {g_edge:.5f}")


def test_criterion_09_solver_convergence(report):
    horizon, ref_h = 10.0, 2.5e-4
    ref = propagator.solve_u(ohmic(10.0), OMEGA0, horizon, ref_h)
    errs = []
    for h in (2e-3, 1e-3):
        traj = propagator.solve_u(ohmic(10.0), OMEGA0, horizon, h)
        errs.append(np.max(np.abs(traj.u - ref.u[::int(round(h / ref_h))])))
    ratio = errs[0] / errs[1]
    report(9, ratio >= 3.5, f"max-norm errors {errs[0]:.2e} -> {errs[1]:.2e}, ratio {ratio:.2f} >= 3.5")


def test_criterion_10_physicality(report):
    rng = np.random.default_rng(10)
    us = np.sqrt(rng.random(1000)) * np.exp(2j * math.pi * rng.random(1000))
    worst_eig, worst_trace, worst_herm = 0.0, 0.0, 0.0
    for u in us:
        rho = dv.channel_state_dv(u).rho
        worst_eig = min(worst_eig, np.linalg.eigvalsh(rho).min())
        worst_trace = max(worst_trace, abs(np.trace(rho) - 1))
        worst_herm = max(worst_herm, np.max(np.abs(rho - rho.conj().T)))

    worst_prob = 0.0
    for u in us[:300]:
        state = dv.QubitInputState(math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))
        worst_prob = max(worst_prob, abs(sum(o.probability for o in dv.simulate_teleport_dv(u, state)) - 1))

    rs = 3 * rng.random(1000)
    t = rng.uniform(0, 50, 1000)
    kappa = rng.uniform(0, 2, 1000)
    bs = spectrum.BoundState(E_b=-0.3, Z=0.7, gap="below")
    values = np.concatenate([
        dv.avg_fidelity_dv(us), dv.ideal_fidelity_dv(1.0, t), dv.bma_fidelity_dv(kappa, 1.0, t),
        dv.steady_fidelity_dv(bs, t), [dv.oracle_avg_fidelity_dv(u, 16, 16) for u in us[:50]],
        [cv.avg_fidelity_cv(u, r) for u, r in zip(us, rs)], cv.ideal_fidelity_cv(1.5, 1.0, t),
        [cv.bma_fidelity_cv(k, 1.0, r, tv) for k, r, tv in zip(kappa, rs, t)],
        cv.steady_fidelity_cv(bs, 2.0, t), [cv.oracle_avg_fidelity_cv(u, r) for u, r in zip(us[:20], rs[:20])],
    ])
    in_range = bool(np.all((values > 0) & (values <= 1 + 1e-12)))
    ok = worst_eig >= -1e-14 and worst_trace <= 1e-14 and worst_herm == 0 and worst_prob <= 1e-10 and in_range
    report(10, ok, f"channel state min eigenvalue {worst_eig:.1e}, trace error {worst_trace:.1e}, "
                   f"hermiticity {worst_herm:.1e}; sum P_k error {worst_prob:.1e}; "
                   f"{values.size} fidelities in (0, 1]: {in_range}")
