"""Flat-file readers and writers. Floats are written with ``%.17g`` so runs are byte-stable."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .exceptions import ProfileError
from .profiles import ProfileGrid, SProfile
from .soliton import RESIDUAL_COLUMNS, ClosureReport

PROFILE_HEADER = ("t", "H", "F", "f")
SPROFILE_HEADER = ("s", "alpha", "beta", "phi")
RESIDUAL_HEADER = ("t",) + RESIDUAL_COLUMNS
CURVATURE_HEADER = ("t", "rc_normal", "rc_fiber", "rc_base", "kahler_residual")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_table(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_plain) + "\n")
    return path


def write_profile_csv(path, grid: ProfileGrid) -> Path:
    return write_table(path, PROFILE_HEADER, zip(grid.t, grid.H, grid.F, grid.f))


def write_sprofile_csv(path, sp: SProfile) -> Path:
    """Write ``s,alpha,beta,phi`` plus a JSON sidecar holding the constants."""
    path = write_table(path, SPROFILE_HEADER, zip(sp.s, sp.alpha, sp.beta, sp.phi))
    sidecar = {k: float(v) for k, v in sp.constants.items()}
    sidecar["q"] = int(sp.q)
    write_json(path.with_suffix(".json"), sidecar)
    return path


def write_residual_csv(path, table: np.ndarray) -> Path:
    return write_table(path, RESIDUAL_HEADER, np.atleast_2d(table) if len(table) else [])


def write_curvature_csv(path, table: np.ndarray) -> Path:
    return write_table(path, CURVATURE_HEADER, np.atleast_2d(table) if len(table) else [])


def write_closure_json(path, report: ClosureReport) -> Path:
    return write_json(path, report.to_dict())


def _read_columns(path, required) -> dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise ProfileError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ProfileError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ProfileError(f"{path}: missing column(s) {', '.join(missing)}")
        idx = [header.index(c) for c in required]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ProfileError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(row[i]) for i in idx])
            except ValueError:
                raise ProfileError(f"{path}:{lineno}: non-numeric value") from None
    data = np.array(rows, dtype=float).reshape(-1, len(required))
    return {c: data[:, j] for j, c in enumerate(required)}


def parse_profile_csv(path) -> ProfileGrid:
    """Read a ``t,H,F,f`` file into a finite-difference grid."""
    cols = _read_columns(path, PROFILE_HEADER)
    if np.any(np.diff(cols["t"]) <= 0):
        raise ProfileError(f"{path}: non-monotone t column")
    return ProfileGrid(cols["t"], cols["H"], cols["F"], cols["f"], derivative_source="finite-difference")


def parse_sprofile_csv(path, q: int = 1) -> SProfile:
    cols = _read_columns(path, SPROFILE_HEADER)
    sidecar = Path(path).with_suffix(".json")
    constants = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    q = int(constants.pop("q", q))
    return SProfile(cols["s"], cols["alpha"], cols["beta"], cols["phi"], constants, q=q)
