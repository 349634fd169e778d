"""CSV and JSON writers with fixed number formatting."""
from __future__ import annotations

import json
import math
import os

import numpy as np

FLOAT_FMT = "%.12e"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    return FLOAT_FMT % f


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def write_trajectory(path, traj, coeffs=None, stride=1):
    """Columns t, re_u, im_u, abs_u and, with ``coeffs``, gamma and omega."""
    sl = slice(None, None, stride)
    cols = [traj.t[sl], traj.u.real[sl], traj.u.imag[sl], np.abs(traj.u)[sl]]
    header = ["t", "re_u", "im_u", "abs_u"]
    if coeffs is not None:
        cols += [coeffs.gamma[sl], coeffs.omega[sl]]
        header += ["gamma", "omega"]
    write_csv(path, header, zip(*cols))


def write_spectrum_sweep(path, sweep):
    """Columns param, band_lo, band_hi, E_b, Z; one row per bound state, E_b/Z empty if none."""
    rows = []
    for p, lo, hi, states in zip(sweep.params, sweep.band_lo, sweep.band_hi, sweep.states):
        if not states:
            rows.append((p, lo, hi, None, None))
        for b in states:
            rows.append((p, lo, hi, b.E_b, b.Z))
    write_csv(path, ["param", "band_lo", "band_hi", "E_b", "Z"], rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
