"""Command-line front end.

    cohosoliton {construct,verify,models,levelset,sweep} --config FILE --out DIR
                [--format csv,json,svg] [--tolerance X]

Exit codes: 0 success, 1 invalid configuration or input, 2 numerical
failure, 3 verification failure. ``COHOSOLITON_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import io
from .contact import (
    acms_residual,
    framed_orbit,
    induce_level_set,
    model_catalog,
    structure_dump,
    symmetry_residuals,
)
from .curvature import curvature_table
from .exceptions import ConfigError, ProfileError, QuadratureError
from .profiles import AnsatzParams, derivative, value
from .soliton import (
    CLOSURE_MODES,
    FD_TOLERANCE,
    RESIDUAL_COLUMNS,
    closure_check_grid,
    construct,
    residual_table,
)

log = logging.getLogger("cohosoliton")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("construct", "verify", "models", "levelset", "sweep")
FORMATS = ("csv", "json", "svg")
LOG_ENV = "COHOSOLITON_LOG"

INT_KEYS = {"n", "q", "count", "jobs"}
FLOAT_KEYS = {
    "k", "lambda", "beta0", "B", "C", "alpha0", "s0", "s_end", "tolerance",
    "t_anchor", "a_slope", "H0", "c0", "c1", "t0", "t1",
}
STR_KEYS = {"closure_mode", "branch", "derivatives", "profile", "base_kind", "fiber_kind"}
LIST_KEYS = {"t_values", "k_values", "lambda_values", "beta0_values", "n_values"}
KNOWN_KEYS = INT_KEYS | FLOAT_KEYS | STR_KEYS | LIST_KEYS

REQUIRED = {
    "construct": ("n", "k", "lambda"),
    "verify": ("n", "k", "lambda", "profile"),
    "models": (),
    "levelset": ("n", "k", "lambda", "t_values"),
    "sweep": ("n", "k_values", "lambda_values", "beta0_values"),
}


class VerificationFailed(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    values: dict
    out: Path
    formats: tuple[str, ...] = ("csv", "json")
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def params(self, k=None, lam=None) -> AnsatzParams:
        try:
            return AnsatzParams(
                n=self.values["n"],
                k=self.values["k"] if k is None else k,
                lam=self.values["lambda"] if lam is None else lam,
                q=self.values.get("q", 1),
                base_kind=self.values.get("base_kind"),
                fiber_kind=self.values.get("fiber_kind", "circle"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def solver_kwargs(self) -> dict:
        keys = {
            "beta0": "beta0", "B": "B", "C": "C", "alpha0": "alpha0", "s0": "s0",
            "s_end": "s_end", "count": "count", "closure_mode": "closure_mode",
            "tolerance": "tolerance", "derivatives": "derivatives", "t_anchor": "t_anchor",
            "branch": "branch", "a_slope": "a_slope", "H0": "H0", "c0": "c0", "c1": "c1",
        }
        kw = {dst: self.values[src] for src, dst in keys.items() if src in self.values}
        if "t0" in self.values or "t1" in self.values:
            kw["interval"] = (self.values.get("t0", 0.0), self.values.get("t1", 1.0))
        return kw


def _coerce(key: str, raw):
    try:
        if key in LIST_KEYS:
            if isinstance(raw, str):
                raw = [x for x in raw.replace(";", ",").split(",") if x.strip()]
            if not isinstance(raw, (list, tuple)) or not raw:
                raise ValueError("expected a non-empty list")
            return [int(x) if key == "n_values" else float(x) for x in raw]
        if key in INT_KEYS:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError("expected an integer")
            return int(raw)
        if key in FLOAT_KEYS:
            if isinstance(raw, bool):
                raise ValueError("expected a number")
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def read_config(path) -> dict:
    """Flat JSON object, or ``key = value`` lines with ``#`` comments."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if any(isinstance(v, dict) for v in raw.values()):
            raise ConfigError(f"{path}: config must be flat, nested objects are not allowed")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            raw[key] = val
    if "lam" in raw and "lambda" not in raw:
        raw["lambda"] = raw.pop("lam")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    return {key: _coerce(key, val) for key, val in raw.items()}


def validate(cfg: RunConfig) -> None:
    missing = [k for k in REQUIRED[cfg.command] if k not in cfg.values]
    if missing:
        raise ConfigError(f"{cfg.command} needs config key(s): {', '.join(missing)}")
    tol = cfg.get("tolerance")
    if tol is not None and not tol > 0:
        raise ConfigError("tolerance must be positive")
    mode = cfg.get("closure_mode")
    if mode is not None and mode not in CLOSURE_MODES:
        raise ConfigError(f"closure_mode must be one of {CLOSURE_MODES}")
    if cfg.get("jobs", 1) < 1:
        raise ConfigError("jobs must be >= 1")


# ---------------------------------------------------------------------------
# plots


def _write_svg(path: Path, t, series: dict, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "cohosoliton", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, y in series.items():
            ax.plot(t, y, label=name, linewidth=1.2)
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _plots(cfg: RunConfig, grid, table) -> None:
    if "svg" not in cfg.formats:
        return
    _write_svg(cfg.out / "profile.svg", grid.t, {"H": grid.H, "F": grid.F, "f": grid.f}, "profile")
    if len(table):
        cols = {c: table[:, 1 + i] for i, c in enumerate(RESIDUAL_COLUMNS)}
        _write_svg(cfg.out / "residuals.svg", table[:, 0], cols, "residual")


# ---------------------------------------------------------------------------
# commands


def _tolerance(cfg: RunConfig, default: float) -> float:
    return cfg.get("tolerance", default)


def cmd_construct(cfg: RunConfig) -> int:
    params = cfg.params()
    bundle = construct(params, **cfg.solver_kwargs())
    io.write_profile_csv(cfg.out / "profile.csv", bundle.grid)
    if bundle.sprofile is not None:
        io.write_sprofile_csv(cfg.out / "sprofile.csv", bundle.sprofile)
    io.write_residual_csv(cfg.out / "residuals.csv", bundle.residuals)
    io.write_closure_json(cfg.out / "closure.json", bundle.closure)
    summary = {
        "max_residual": bundle.max_residual,
        "tolerance": bundle.tolerance,
        "residual_pass": bundle.residual_pass,
        "closure_pass": bundle.closure.passed,
        "checked": list(bundle.checked),
        "metadata": bundle.metadata,
    }
    io.write_json(cfg.out / "summary.json", summary)
    _plots(cfg, bundle.grid, bundle.residuals)
    log.info("construct: max residual %.3e (tol %.1e), closure %s",
             bundle.max_residual, bundle.tolerance, "pass" if bundle.closure.passed else "fail")
    if not bundle.ok:
        raise VerificationFailed(
            f"max residual {bundle.max_residual:.3e} vs {bundle.tolerance:.1e}, "
            f"closure {'pass' if bundle.closure.passed else 'fail'}"
        )
    return EXIT_OK


def _profile_path(cfg: RunConfig) -> Path:
    p = Path(cfg.get("profile"))
    return p if p.is_absolute() else cfg.base_dir / p


def cmd_verify(cfg: RunConfig) -> int:
    params = cfg.params()
    grid = io.parse_profile_csv(_profile_path(cfg))
    table = residual_table(params, grid)
    io.write_residual_csv(cfg.out / "residuals.csv", table)
    io.write_curvature_csv(cfg.out / "curvature.csv", curvature_table(params, grid))
    tol = _tolerance(cfg, FD_TOLERANCE)
    worst = float(np.max(np.abs(table[:, 1:]))) if len(table) else 0.0
    summary = {"max_residual": worst, "tolerance": tol, "residual_pass": worst <= tol}
    mode = cfg.get("closure_mode", "none")
    ok = worst <= tol
    if mode != "none":
        report = closure_check_grid(grid, mode)
        io.write_closure_json(cfg.out / "closure.json", report)
        summary["closure_pass"] = report.passed
        ok = ok and report.passed
    io.write_json(cfg.out / "summary.json", summary)
    _plots(cfg, grid, table)
    if not ok:
        raise VerificationFailed(f"profile fails verification (max residual {worst:.3e})")
    return EXIT_OK


def cmd_models(cfg: RunConfig) -> int:
    catalog = model_catalog(tuple(cfg.get("n_values", [2, 3, 4])))
    io.write_json(cfg.out / "catalog.json", catalog)
    return EXIT_OK


def cmd_levelset(cfg: RunConfig) -> int:
    params = cfg.params()
    if "profile" in cfg.values:
        grid = io.parse_profile_csv(_profile_path(cfg))
    else:
        grid = construct(params, **cfg.solver_kwargs()).grid
    lo, hi = grid.span
    records = []
    worst = 0.0
    for t in cfg.get("t_values"):
        if not lo < t < hi:
            raise ConfigError(f"t = {t} outside the open profile range ({lo}, {hi})")
        H, F = value(grid, "H", t), value(grid, "F", t)
        fp = derivative(grid, "f", 1, t)
        orbit = framed_orbit(params.n, H, F)
        cs = induce_level_set(orbit, H, fp)
        sym = symmetry_residuals(grid, t)
        rec = {"t": t, "H": H, "F": F, "f_prime": fp, "structure": structure_dump(orbit, cs)}
        rec["symmetry"] = {
            "killing_z": sym.killing_z,
            "killing_Jgradf": sym.killing_Jgradf,
            "lie_f_const": sym.lie_f_const,
        }
        worst = max(worst, *acms_residual(orbit, cs))
        records.append(rec)
    io.write_json(cfg.out / "levelset.json", records)
    tol = _tolerance(cfg, 1e-12)
    if worst > tol:
        raise VerificationFailed(f"ACMS residual {worst:.3e} exceeds {tol:.1e}")
    return EXIT_OK


SWEEP_HEADER = ("cell", "k", "lambda", "beta0", "status", "closure_pass", "residual_pass",
                "max_residual", "constraint")


def _sweep_cell(args):
    idx, values, k, lam, beta0 = args
    cfg = RunConfig("sweep", dict(values, k=k, **{"lambda": lam}, beta0=beta0), Path("."))
    kwargs = cfg.solver_kwargs()
    kwargs.setdefault("closure_mode", "fiber-collapse")
    constraint = k - lam * beta0
    try:
        bundle = construct(cfg.params(), **kwargs)
    except (ProfileError, QuadratureError, ValueError) as exc:
        return (idx, k, lam, beta0, "error:" + type(exc).__name__, False, False, float("nan"), constraint)
    return (idx, k, lam, beta0, "ok", bundle.closure.passed, bundle.residual_pass,
            bundle.max_residual, constraint)


def cmd_sweep(cfg: RunConfig) -> int:
    base = {k: v for k, v in cfg.values.items() if k not in LIST_KEYS and k != "jobs"}
    base.setdefault("s_end", 0.2)
    base.setdefault("count", 401)
    cells = [
        (i, base, k, lam, b)
        for i, (k, lam, b) in enumerate(
            product(cfg.get("k_values"), cfg.get("lambda_values"), cfg.get("beta0_values"))
        )
    ]
    jobs = cfg.get("jobs", 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    rows.sort(key=lambda r: r[0])
    io.write_table(cfg.out / "sweep.csv", SWEEP_HEADER, rows)
    log.info("sweep: %d cells, %d closure passes", len(rows), sum(r[5] for r in rows))
    return EXIT_OK


HANDLERS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "models": cmd_models,
    "levelset": cmd_levelset,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohosoliton", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat JSON or key = value file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", default="csv,json", help="comma list from csv,json,svg")
    parser.add_argument("--tolerance", type=float, help="override the residual tolerance")
    return parser


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def run(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown format(s): {', '.join(bad)}")
        if args.config is None and REQUIRED[args.command]:
            raise ConfigError(f"{args.command} needs --config")
        values = read_config(args.config) if args.config else {}
        if args.tolerance is not None:
            values["tolerance"] = args.tolerance
        base_dir = Path(args.config).resolve().parent if args.config else Path.cwd()
        cfg = RunConfig(args.command, values, Path(args.out), formats, base_dir)
        validate(cfg)
        try:
            cfg.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {cfg.out}: {exc}") from None
        return HANDLERS[args.command](cfg)
    except QuadratureError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except VerificationFailed as exc:
        log.error("verification failed: %s", exc)
        return EXIT_VERIFY
    except (ConfigError, ProfileError, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
