"""Command-line front end.

    nmteleport u-solve   [--config FILE] [overrides]
    nmteleport spectrum  [--config FILE] [overrides]
    nmteleport fidelity  {dv,cv} [--config FILE] [overrides]
    nmteleport oracle    {dv,cv,lattice} [--config FILE] [overrides]

Every configuration key can be overridden with ``--<section>-<key> VALUE``;
keys that are unique across sections also accept ``--<key> VALUE``.
Exit codes: 0 success, 1 numerical tolerance failure, 2 usage or config
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import functools
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io, lattice, propagator, spectral, spectrum
from . import teleport_cv as cv
from . import teleport_dv as dv
from .config import DEFAULTS, ConfigError, bath_from_config, load, sweep_grid
from .errors import NumericalError

log = logging.getLogger("nmteleport")

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _flag(section, key):
    return f"--{section}-{key.replace('_', '-')}"


def _config_parent():
    parent = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    parent.add_argument("--config", help="configuration file (INI sections)")
    parent.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes for sweeps (default: all cores)")
    parent.add_argument("-v", "--verbose", action="store_true")
    counts = {}
    for section, keys in DEFAULTS.items():
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
    reserved = {"config", "jobs", "verbose"}
    grp = parent.add_argument_group("configuration overrides")
    for section, keys in DEFAULTS.items():
        for key, default in keys.items():
            names = [_flag(section, key)]
            if counts[key] == 1 and key not in reserved:
                names.append(f"--{key.replace('_', '-')}")
            grp.add_argument(*names, dest=f"{section}__{key}", default=None, metavar="V",
                             help=f"[{section}] {key} (default {default!r})")
    return parent


def build_parser():
    parent = _config_parent()
    p = argparse.ArgumentParser(prog="nmteleport", allow_abbrev=False,
                                description="Non-Markovian noise in qubit and squeezed-light teleportation.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("u-solve", parents=[parent], allow_abbrev=False,
                   help="solve u(t) and report the bound state")
    sub.add_parser("spectrum", parents=[parent], allow_abbrev=False,
                   help="sweep a bath parameter and track bound states")
    f = sub.add_parser("fidelity", parents=[parent], allow_abbrev=False,
                       help="average-fidelity time series")
    f.add_argument("protocol", choices=["dv", "cv"])
    o = sub.add_parser("oracle", parents=[parent], allow_abbrev=False,
                       help="check closed forms against independent oracles")
    o.add_argument("which", choices=["dv", "cv", "lattice"])
    return p


def _resolve(args):
    overrides = {}
    for section, keys in DEFAULTS.items():
        for key in keys:
            v = getattr(args, f"{section}__{key}")
            if v is not None:
                overrides[(section, key)] = v
    cfg = load(args.config, overrides)
    spectral.EPSABS = cfg["numerics"]["epsabs"]
    spectral.EPSREL = cfg["numerics"]["epsrel"]
    return cfg


def _out(cfg, suffix):
    o = cfg["output"]
    return os.path.join(o["dir"], f"{o['prefix']}_{suffix}")


def _check(name, value, tolerance, passed=None):
    ok = bool(value <= tolerance) if passed is None else bool(passed)
    return {"name": name, "value": value, "tolerance": tolerance, "passed": ok}


def _states(states):
    return [{"E_b": b.E_b, "Z": b.Z, "gap": b.gap} for b in states]


# -- u-solve ----------------------------------------------------------------

def cmd_u_solve(cfg, jobs=1):
    sd = bath_from_config(cfg["bath"])
    w0 = cfg["system"]["omega_0"]
    num = cfg["numerics"]
    t0 = time.perf_counter()
    traj = propagator.solve_u(sd, w0, num["t_max"], num["h"])
    t_solve = time.perf_counter() - t0
    coeffs = None
    if cfg["output"]["coeffs"]:
        coeffs = propagator.master_eq_coeffs(traj)
    io.write_trajectory(_out(cfg, "u.csv"), traj, coeffs, cfg["output"]["stride"])

    states = spectrum.find_bound_states(sd, w0)
    results = {
        "final_abs_u": float(abs(traj.u[-1])),
        "bound_state": bool(states),
        "bound_states": _states(states),
        "Z": max((b.Z for b in states), default=0.0),
        "kernel_evaluations": traj.kernel_evaluations,
        "scheme": traj.scheme,
    }
    if isinstance(sd, spectral.OhmicFamily):
        results["ohmic_criteria"] = spectrum.ohmic_criteria(sd, w0)
    t1 = time.perf_counter()
    if len(states) <= 1:
        branch = None
        if spectral.total_weight(sd) > 0:
            branch = propagator.BranchCut(sd, w0, n_nodes=num["branch_nodes"])
        bs = states[0] if states else None
        results["asymptotic_abs_u_final"] = float(abs(propagator.asymptotic_u(
            sd, w0, bs, traj.t[-1], branch=branch)))
    timings = {"solve_u": t_solve, "asymptotic": time.perf_counter() - t1}
    return {"results": results, "timings": timings, "checks": []}


# -- spectrum ---------------------------------------------------------------

def _family(bath, param, value):
    return bath_from_config(bath, **{param: value})


def cmd_spectrum(cfg, jobs=1):
    sw = cfg["sweep"]
    if not sw["param"]:
        raise ConfigError("spectrum needs [sweep] param")
    if sw["param"] not in DEFAULTS["bath"] or sw["param"] in ("kind", "table"):
        raise ConfigError(f"cannot sweep bath parameter {sw['param']!r}")
    grid = sweep_grid(sw)
    w0 = cfg["system"]["omega_0"]
    family = functools.partial(_family, dict(cfg["bath"]), sw["param"])
    t0 = time.perf_counter()
    result = spectrum.spectrum_sweep(family, w0, grid, jobs=jobs)
    io.write_spectrum_sweep(_out(cfg, "spectrum.csv"), result)
    bracket = result.threshold_bracket()
    threshold = None
    if bracket is not None:
        threshold = spectrum.locate_threshold(family, w0, *bracket, tol=cfg["numerics"]["threshold_tol"])
    branch = [{"param": float(p), "states": _states(s)} for p, s in zip(result.params, result.states) if s]
    results = {"threshold_estimate": threshold, "threshold_bracket": bracket, "branch": branch}
    return {"results": results, "timings": {"sweep": time.perf_counter() - t0}, "checks": []}


# -- fidelity ---------------------------------------------------------------

def _local_maxima(y):
    i = np.flatnonzero((y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:])) + 1
    return i


def fidelity_series(cfg, protocol, sd):
    """Time series of the exact, Born-Markov and envelope fidelities for one bath."""
    w0, r = cfg["system"]["omega_0"], cfg["system"]["r"]
    num = cfg["numerics"]
    traj = propagator.solve_u(sd, w0, num["t_max"], num["h"])
    t, u = traj.t, traj.u
    try:
        kappa = propagator.markov_rate(sd, w0)
    except ValueError:
        kappa = None
    mod = np.abs(u)
    if protocol == "dv":
        exact = dv.avg_fidelity_dv(u)
        envelope = (2 + mod**4) / 3
        bma = dv.bma_fidelity_dv(kappa, w0, t) if kappa is not None else np.full(t.size, np.nan)
        classical = 2 / 3
        steady_max = dv.steady_max_fidelity_dv
    else:
        exact = cv.avg_fidelity_cv(u, r)
        envelope = cv.max_phase_fidelity_cv(mod, r)
        bma = cv.bma_fidelity_cv(kappa, w0, r, t) if kappa is not None else np.full(t.size, np.nan)
        classical = 0.5
        steady_max = functools.partial(cv.steady_max_fidelity_cv, r=r)
    states = spectrum.find_bound_states(sd, w0)
    Z = max((b.Z for b in states), default=0.0)
    late = t >= 0.8 * t[-1]
    idx = _local_maxima(exact)
    idx = idx[late[idx]]
    summary = {
        "bound_states": _states(states),
        "Z": Z,
        "steady_max": steady_max(Z) if states else classical,
        "classical_limit": classical,
        "late_maxima_mean": float(exact[idx].mean()) if idx.size else None,
        "late_window": [float(0.8 * t[-1]), float(t[-1])],
        "final_fidelity": float(exact[-1]),
        "max_late_deviation_from_classical": float(np.max(np.abs(exact[late] - classical))),
    }
    return t, exact, bma, envelope, summary


def _fidelity_point(cfg, protocol, param, value):
    changes = {param: value} if param else {}
    sd = bath_from_config(cfg["bath"], **changes)
    return fidelity_series(cfg, protocol, sd)


def cmd_fidelity(cfg, protocol, jobs=1):
    sw = cfg["sweep"]
    header = ["t", "F_exact", "F_bma", "F_steady_envelope"]
    stride = cfg["output"]["stride"]
    t0 = time.perf_counter()
    if sw["param"]:
        grid = sweep_grid(sw)
        worker = functools.partial(_fidelity_point, cfg, protocol, sw["param"])
        if jobs > 1 and grid.size > 1:
            with ProcessPoolExecutor(max_workers=min(jobs, grid.size)) as pool:
                outputs = list(pool.map(worker, grid))
        else:
            outputs = [worker(v) for v in grid]
        points = []
        for i, (v, (t, ex, bm, env, summary)) in enumerate(zip(grid, outputs)):
            path = _out(cfg, f"fidelity_{protocol}_{i:03d}.csv")
            io.write_csv(path, header, zip(t[::stride], ex[::stride], bm[::stride], env[::stride]))
            points.append({"param": float(v), "file": path, **summary})
        results = {"param": sw["param"], "points": points}
    else:
        t, ex, bm, env, summary = _fidelity_point(cfg, protocol, "", None)
        io.write_csv(_out(cfg, f"fidelity_{protocol}.csv"), header,
                     zip(t[::stride], ex[::stride], bm[::stride], env[::stride]))
        results = summary
    return {"results": results, "timings": {"fidelity": time.perf_counter() - t0}, "checks": []}


# -- oracle -----------------------------------------------------------------

def _random_disk(rng, n):
    return np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n))


def cmd_oracle(cfg, which, jobs=1):
    num = cfg["numerics"]
    rng = np.random.default_rng(num["seed"])
    t0 = time.perf_counter()
    checks = []
    if which == "dv":
        us = _random_disk(rng, num["samples"])
        diffs = [abs(dv.oracle_avg_fidelity_dv(u, num["n_theta"], num["n_phi"]) - dv.avg_fidelity_dv(u))
                 for u in us]
        checks.append(_check("dv_oracle_vs_closed_form", float(max(diffs)), num["tolerance"]))
        state = dv.QubitInputState(cfg["system"]["theta"], cfg["system"]["phi"])
        outcomes = dv.simulate_teleport_dv(us[0], state)
        io.write_csv(_out(cfg, "outcomes_dv.csv"), ["k", "P_k", "F_k"],
                     [(o.k, o.probability, o.fidelity) for o in outcomes])
        total = sum(o.probability for o in outcomes)
        checks.append(_check("dv_probability_sum", abs(total - 1), 1e-10))
        results = {"samples": len(us), "max_abs_diff": float(max(diffs)), "outcome_u": complex(us[0])}
    elif which == "cv":
        n = num["samples"]
        us = _random_disk(rng, n)
        rs = 2 * rng.random(n)
        alpha = complex(cfg["system"]["alpha_re"], cfg["system"]["alpha_im"])
        hw = num["cv_half_width"] or None
        diffs, spread = [], []
        for u, r in zip(us, rs):
            ref = cv.avg_fidelity_cv(u, r)
            vals = [cv.oracle_avg_fidelity_cv(u, r, a, hw, num["cv_points"]) for a in (alpha, 0j, 1 + 0.5j)]
            diffs.append(abs(vals[0] - ref))
            spread.append(max(vals) - min(vals))
        checks.append(_check("cv_oracle_vs_closed_form", float(max(diffs)), num["tolerance"]))
        checks.append(_check("cv_alpha_independence", float(max(spread)), num["tolerance"]))
        results = {"samples": n, "max_abs_diff": float(max(diffs)), "max_alpha_spread": float(max(spread))}
    else:
        b = cfg["bath"]
        p = lattice.ChainParams(N=num["lattice_n"], omega_r=b["omega_r"], xi=b["xi"],
                                omega0=cfg["system"]["omega_0"], g=b["g"])
        sd = spectral.Semicircle(g=p.g, xi=p.xi, omega_r=p.omega_r)
        levels = lattice.excitation_spectrum(p)
        io.write_csv(_out(cfg, "lattice_spectrum.csv"), ["j", "E_j", "weight"],
                     zip(range(levels.energies.size), levels.energies, levels.weights))
        window = p.comparison_window
        T = min(num["t_max"], num["h"] * math.floor(0.95 * window / num["h"]))
        traj = propagator.solve_u(sd, p.omega0, T, num["h"])
        exact = lattice.exact_u(p, traj.t, spectrum=levels)
        io.write_trajectory(_out(cfg, "lattice_u.csv"), exact, stride=cfg["output"]["stride"])
        dev = float(np.max(np.abs(np.abs(exact.u) - np.abs(traj.u))))
        checks.append(_check("lattice_vs_volterra_modulus", dev, num["lattice_tolerance"]))
        states = spectrum.find_bound_states(sd, p.omega0)
        t_late = np.linspace(0.5 * window, 0.95 * window, 2001)
        plateau = float(np.mean(np.abs(lattice.exact_u(p, t_late, spectrum=levels).u)))
        results = {"compare_horizon": T, "max_modulus_deviation": dev, "plateau": plateau,
                   "bound_states": _states(states)}
        if len(states) == 1:
            checks.append(_check("lattice_plateau_vs_Z", abs(plateau - states[0].Z),
                                 num["plateau_tolerance"]))
        results["weight_sum_error"] = float(abs(levels.weights.sum() - 1))
        checks.append(_check("lattice_weight_normalisation", results["weight_sum_error"], 1e-12))
    return {"results": results, "timings": {"oracle": time.perf_counter() - t0}, "checks": checks}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        jobs = max(1, args.jobs)
        if args.command == "u-solve":
            name, report = "u", cmd_u_solve(cfg, jobs)
        elif args.command == "spectrum":
            name, report = "spectrum", cmd_spectrum(cfg, jobs)
        elif args.command == "fidelity":
            name, report = f"fidelity_{args.protocol}", cmd_fidelity(cfg, args.protocol, jobs)
        else:
            name, report = f"oracle_{args.which}", cmd_oracle(cfg, args.which, jobs)
        summary = {
            "config": cfg,
            "results": report["results"],
            "timings": report["timings"],
            "tolerances": {c["name"]: c["tolerance"] for c in report["checks"]},
            "checks": report["checks"],
        }
        io.write_json(_out(cfg, f"{name}.json"), summary)
    except ConfigError as exc:
        print(f"nmteleport: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nmteleport: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        print(f"nmteleport: numerical failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    failed = [c for c in report["checks"] if not c["passed"]]
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})")
    print(f"summary written to {_out(cfg, name + '.json')}")
    return EXIT_TOLERANCE if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
