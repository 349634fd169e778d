"""Sectioned key-value run configuration (INI syntax) with command-line overrides."""
from __future__ import annotations

import configparser
import copy

import numpy as np

from . import spectral

DEFAULTS = {
    "bath": {
        "kind": "ohmic",        # ohmic | semicircle | tabulated
        "eta": 0.2,
        "s": 1.0,
        "omega_c": 10.0,
        "g": 0.05,
        "xi": 0.08,
        "omega_r": 1.0,
        "table": "",            # omega,J CSV for kind = tabulated
    },
    "system": {
        "omega_0": 1.0,
        "r": 2.0,
        "alpha_re": 0.0,
        "alpha_im": 0.0,
        "theta": 1.0,           # qubit input used for the outcome dump
        "phi": 0.5,
    },
    "numerics": {
        "h": 1e-3,
        "t_max": 100.0,
        "epsabs": 1e-10,
        "epsrel": 1e-8,
        "n_theta": 32,
        "n_phi": 32,
        "cv_points": 201,
        "cv_half_width": 0.0,   # 0 picks the half-width from the outcome covariance
        "lattice_n": 500,
        "samples": 100,
        "seed": 20240,
        "tolerance": 1e-6,
        "lattice_tolerance": 1e-3,
        "plateau_tolerance": 1e-2,
        "threshold_tol": 1e-4,
        "branch_nodes": 801,
    },
    "sweep": {
        "param": "",            # e.g. omega_c or g; empty means a single run
        "start": 0.0,
        "stop": 0.0,
        "count": 0,
    },
    "output": {
        "dir": "out",
        "prefix": "run",
        "coeffs": False,        # add gamma, omega columns to trajectory CSVs
        "stride": 1,            # write every stride-th time sample
    },
}


class ConfigError(ValueError):
    pass


def _coerce(section, key, raw):
    ref = DEFAULTS[section][key]
    try:
        if isinstance(ref, bool):
            if isinstance(raw, bool):
                return raw
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(ref, int):
            return int(raw)
        if isinstance(ref, float):
            return float(raw)
        return str(raw).strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {type(ref).__name__}") from None


def load(path=None, overrides=None) -> dict:
    """Resolved configuration: defaults, then the file at ``path``, then ``overrides``.

    ``overrides`` maps (section, key) to raw values.
    """
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path) as fh:
            parser.read_file(fh)
        for section in parser.sections():
            if section not in cfg:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in cfg[section]:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
                cfg[section][key] = _coerce(section, key, raw)
    for (section, key), raw in (overrides or {}).items():
        cfg[section][key] = _coerce(section, key, raw)
    return cfg


def bath_from_config(bath: dict, **changes):
    """Spectral density for a [bath] section, with optional parameter overrides."""
    bath = {**bath, **changes}
    kind = bath["kind"].lower()
    try:
        if kind == "ohmic":
            return spectral.OhmicFamily(eta=float(bath["eta"]), s=float(bath["s"]),
                                        omega_c=float(bath["omega_c"]))
        if kind == "semicircle":
            return spectral.Semicircle(g=float(bath["g"]), xi=float(bath["xi"]),
                                       omega_r=float(bath["omega_r"]))
        if kind == "tabulated":
            if not bath["table"]:
                raise ConfigError("[bath] kind = tabulated needs a table path")
            return spectral.Tabulated.from_csv(bath["table"])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[bath] {exc}") from None
    raise ConfigError(f"[bath] unknown kind {bath['kind']!r}")


def sweep_grid(sweep: dict):
    if sweep["count"] < 1 or sweep["stop"] < sweep["start"] or (
            sweep["count"] > 1 and sweep["stop"] == sweep["start"]):
        raise ConfigError("empty sweep range")
    return np.linspace(sweep["start"], sweep["stop"], sweep["count"])
