"""Batch front end: read a JSON problem description, run a pipeline, write a JSON result.

Config schema (all keys optional unless the mode needs them)::

    {
      "mode": "filter" | "filter-finite-T" | "minimax-D0" | "minimax-DuvEps" | "validate",
      "increment": {"n": 1, "tau": 1.0},
      "weight": {"kind": "exponential", "beta": 1.0},        # WeightFunction.from_dict
      "f": {"kind": "rational", "num": [1], "den": [1, 2, 1]},  # DensityModel.from_dict
      "g": {"kind": "rational", "num": [1], "den": [1, 1]},
      "T": 2.0,                                               # filter-finite-T horizon
      "grid": {"length": null, "step": 0.02, "basis_size": 24, "basis_beta": 1.0,
               "cutoff": null},
      "classes": {"f": {...}, "g": {...}},                    # DensityClass.from_dict
      "minimax": {"max_iters": 200, "tol": 1e-9, "damping": 0.5, "anderson": 5},
      "saddle": {"samples": 50, "rel_slack": 1e-3},
      "validate": {"replicates": 10000, "route_tol": 0.01, "oracle_tol": 0.05,
                   "max_z": 3.0, "monte_carlo": true, "cases": null},
      "output": {"lam_max": 20.0, "points": 401, "t_points": 201},
      "seed": 0
    }

Floats are written with 17 significant digits so that results re-parse bit-exactly.
Exit codes: 0 success, 1 other library error, 2 config error, 3 non-convergence,
4 validation mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConfigError, IncFilterError, NoConvergence, NonConverged, RouteMismatch,
                     SaddleViolated)
from .filtering import mean_square_error
from .increments import IncrementSpec
from .kernels import GridConfig
from .minimax import DensityClass, MinimaxConfig, least_favorable, saddle_check
from .simulate import SynthesisPlan, brute_force_projection, empirical_filter_mse, standard_suite
from .solver import orthogonality_residual, solve_c
from .spectra import DensityModel, ObservationModel, WeightFunction, check_minimality

MODES = ("filter", "filter-finite-T", "minimax-D0", "minimax-DuvEps", "validate")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_MISMATCH = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _encode(obj) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        text = format(x, ".17g")
        # keep the token a float on re-parse (and keep the sign of -0.0)
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written as ``%.17g``."""
    return _encode(obj) + "\n"


def loads(text: str):
    return json.loads(text)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ProblemConfig:
    mode: str
    spec: IncrementSpec
    weight: WeightFunction
    f: DensityModel | None
    g: DensityModel | None
    grid: GridConfig
    T: float | None = None
    classes: dict = field(default_factory=dict)
    minimax: MinimaxConfig = field(default_factory=MinimaxConfig)
    saddle: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int = 0
    raw: dict = field(default_factory=dict)


def _positive(d: dict, key: str, name: str, default=None, integer=False):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"must be a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(name, f"must be an integer, got {v!r}")
    if not v > 0 or not math.isfinite(v):
        raise ConfigError(name, f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _density(d, name):
    if d is None:
        return None
    try:
        return DensityModel.from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(name, str(exc)) from exc


def parse_config(raw: dict, mode: str | None = None, seed: int | None = None,
                 grid_scale: float | None = None) -> ProblemConfig:
    """Validate a config dictionary; raise ``ConfigError`` naming the offending field."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "must be a JSON object")
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
    inc = raw.get("increment", {})
    n = _positive(inc, "n", "n", 1, integer=True)
    tau = _positive(inc, "tau", "tau", 1.0)
    spec = IncrementSpec(n, tau)
    try:
        weight = WeightFunction.from_dict(raw.get("weight", {"kind": "exponential", "beta": 1.0}))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("weight", str(exc)) from exc
    f = _density(raw.get("f"), "f")
    g = _density(raw.get("g"), "g")
    gd = raw.get("grid", {})
    scale = grid_scale if grid_scale is not None else gd.get("scale", 1.0)
    if not isinstance(scale, (int, float)) or not scale > 0:
        raise ConfigError("grid-scale", f"must be positive, got {scale!r}")
    grid = GridConfig(length=_positive(gd, "length", "grid.length"),
                      step=_positive(gd, "step", "grid.step", 0.02),
                      basis_size=_positive(gd, "basis_size", "grid.basis_size", 24, integer=True),
                      basis_beta=_positive(gd, "basis_beta", "grid.basis_beta", 1.0),
                      cutoff=_positive(gd, "cutoff", "grid.cutoff"), scale=float(scale))
    T = _positive(raw, "T", "T")
    classes = {}
    for key, cd in (raw.get("classes") or {}).items():
        if key not in ("f", "g"):
            raise ConfigError(f"classes.{key}", "only 'f' and 'g' classes exist")
        try:
            classes[key] = DensityClass.from_dict(cd)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"classes.{key}", str(exc)) from exc
    md = raw.get("minimax", {})
    mm = MinimaxConfig(max_iters=_positive(md, "max_iters", "minimax.max_iters", 200, integer=True),
                       tol=_positive(md, "tol", "minimax.tol", 1e-9),
                       damping=_positive(md, "damping", "minimax.damping", 0.5),
                       anderson=int(md.get("anderson", 5)),
                       basis_size=grid.basis_size, basis_beta=grid.basis_beta,
                       scale=grid.scale, cutoff=grid.cutoff)
    seed = seed if seed is not None else raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed", f"must be a nonnegative integer, got {seed!r}")
    cfg = ProblemConfig(mode, spec, weight, f, g, grid, T, classes, mm, dict(raw.get("saddle", {})),
                        dict(raw.get("validate", {})), dict(raw.get("output", {})), seed, raw)
    _check_mode_fields(cfg)
    return cfg


def _check_mode_fields(cfg: ProblemConfig):
    mode = cfg.mode
    if mode in ("filter", "filter-finite-T"):
        for name in ("f", "g"):
            if getattr(cfg, name) is None:
                raise ConfigError(name, f"mode {mode} needs a {name} density")
    if mode == "filter-finite-T" and cfg.T is None and not cfg.weight.finite:
        raise ConfigError("T", "mode filter-finite-T needs a horizon T")
    if mode == "filter" and cfg.T is not None:
        raise ConfigError("T", "a horizon belongs to mode filter-finite-T")
    if mode.startswith("minimax"):
        if not cfg.classes:
            raise ConfigError("classes", f"mode {mode} needs at least one density class")
        for name in ("f", "g"):
            if name not in cfg.classes and getattr(cfg, name) is None:
                raise ConfigError(name, "give either a known density or a class")
        allowed = {"minimax-D0": {"f": ("D0-power",), "g": ("D0-power",)},
                   "minimax-DuvEps": {"f": ("Duv-band",), "g": ("Deps-contamination",)}}[mode]
        for name, cls in cfg.classes.items():
            if cls.kind not in allowed[name]:
                raise ConfigError(f"classes.{name}", f"mode {mode} needs kind {allowed[name][0]}")
    if mode == "validate" and not cfg.validate.get("cases", "standard"):
        raise ConfigError("validate.cases", "empty case list")


def load_config(path: str, **overrides) -> ProblemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("config", f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    return parse_config(raw, **overrides)


# ---------------------------------------------------------------------------
# pipelines


def _echo(cfg: ProblemConfig) -> dict:
    return {"mode": cfg.mode, "increment": {"n": cfg.spec.n, "tau": cfg.spec.tau},
            "weight": cfg.weight.to_dict(),
            "f": cfg.f.to_dict() if cfg.f is not None else None,
            "g": cfg.g.to_dict() if cfg.g is not None else None,
            "T": cfg.T, "grid": {"length": cfg.grid.length, "step": cfg.grid.step,
                                 "basis_size": cfg.grid.basis_size, "basis_beta": cfg.grid.basis_beta,
                                 "cutoff": cfg.grid.cutoff, "scale": cfg.grid.scale},
            "classes": {k: v.to_dict() for k, v in cfg.classes.items()},
            "seed": cfg.seed}


def _output_grid(cfg: ProblemConfig):
    lam_max = float(cfg.output.get("lam_max", 20.0))
    points = int(cfg.output.get("points", 401))
    return np.linspace(0.0, lam_max, points)


def _minimality(model: ObservationModel) -> dict:
    try:
        return check_minimality(model).to_dict()
    except IncFilterError as exc:
        return {"error": str(exc)}


def run_filter(cfg: ProblemConfig) -> dict:
    weight = cfg.weight.truncated(cfg.T) if cfg.mode == "filter-finite-T" and cfg.T else cfg.weight
    model = ObservationModel(cfg.f, cfg.g, cfg.spec)
    sol = solve_c(model, weight, cfg.grid)
    fs = mean_square_error(model, weight, sol)
    lam = _output_grid(cfg)
    h = fs.h(lam)
    t = sol.times
    orth = orthogonality_residual(sol)
    return {"config": _echo(cfg), "minimality": _minimality(model),
            "h": {"lam": lam, "re": np.real(h), "im": np.imag(h)},
            "c": {"t": t, "value": sol.c_values},
            "delta": {"operator": fs.mse, "spectral": fs.mse_spectral, "route_gap": fs.route_gap,
                      "components": {"g": fs.components[0], "f": fs.components[1]},
                      "extra": fs.extra, "q_term": fs.q_term},
            "solver": {"residual_norm": sol.residual_norm, "regularization": sol.regularization_used,
                       "converged": sol.converged, "basis_size": int(sol.coefficients.size),
                       "orthogonality": orth}}


def run_minimax(cfg: ProblemConfig) -> dict:
    fc, gc = cfg.classes.get("f"), cfg.classes.get("g")
    known_f = cfg.f if fc is None else None
    known_g = cfg.g if gc is None else None
    pair = least_favorable(cfg.spec, cfg.weight, f_class=fc, g_class=gc, known_f=known_f, known_g=known_g,
                           f_init=cfg.f if fc is not None else None, g_init=cfg.g if gc is not None else None,
                           cfg=cfg.minimax)
    report = saddle_check(pair, samples=int(cfg.saddle.get("samples", 50)), seed=cfg.seed,
                          rel_slack=float(cfg.saddle.get("rel_slack", 1e-3)), raise_on_violation=False)
    pair.saddle_checked = report.passed
    Phi, h = pair.h()
    model = ObservationModel(pair.f0, pair.g0, cfg.spec)
    out = {"config": _echo(cfg), "minimality": _minimality(model),
           "h": {"lam": pair.lam, "re": np.real(h), "im": np.imag(h)},
           "phi_characteristic": {"re": np.real(Phi), "im": np.imag(Phi)},
           "delta": {"operator": pair.residuals["extremum_value"], "spectral": pair.value},
           "least_favorable": {"lam": pair.lam, "f0": pair.f0_values, "g0": pair.g0_values},
           "multipliers": {"alpha1": pair.alpha1, "alpha2": pair.alpha2, "gamma1": pair.gamma1,
                           "gamma2": pair.gamma2, "phi": pair.phi},
           "residuals": {k: v for k, v in pair.residuals.items() if not isinstance(v, np.ndarray)},
           "iterations": pair.iterations,
           "saddle": report.to_dict()}
    out["passed"] = report.passed
    return out


def _validation_cases(cfg: ProblemConfig):
    sel = cfg.validate.get("cases", "standard")
    suite = standard_suite()
    if sel in (None, "standard"):
        return suite
    if sel == "config":
        if cfg.f is None or cfg.g is None:
            raise ConfigError("validate.cases", "'config' needs f and g densities")
        from .simulate import SuiteCase
        return [SuiteCase("config", ObservationModel(cfg.f, cfg.g, cfg.spec), cfg.weight)]
    names = {c.name: c for c in suite}
    try:
        return [names[s] for s in sel]
    except (KeyError, TypeError) as exc:
        raise ConfigError("validate.cases", f"unknown case {exc}; available: {sorted(names)}") from exc


def run_validate(cfg: ProblemConfig) -> dict:
    """Three-way agreement: operator route, spectral route, projection oracle (and Monte Carlo)."""
    v = cfg.validate
    route_tol = float(v.get("route_tol", 0.01))
    oracle_tol = float(v.get("oracle_tol", 0.05))
    max_z = float(v.get("max_z", 3.0))
    replicates = int(v.get("replicates", 10_000))
    do_mc = bool(v.get("monte_carlo", True))
    rows = []
    for case in _validation_cases(cfg):
        fs = mean_square_error(case.model, case.weight,
                               solve_c(case.model, case.weight, replace(cfg.grid)), check=False)
        oracle = brute_force_projection(case.model, case.weight, scale=cfg.grid.scale)
        gap = abs(oracle.mse - fs.mse) / fs.mse
        row = {"case": case.name, "operator": fs.mse, "spectral": fs.mse_spectral,
               "route_gap": fs.route_gap, "oracle": oracle.mse, "oracle_gap": gap,
               "oracle_condition": oracle.condition,
               "ok": bool(fs.route_gap <= route_tol and gap <= oracle_tol)}
        if do_mc:
            plan = SynthesisPlan.for_model(case.model, case.weight, replicates=replicates,
                                           seed=cfg.seed, scale=cfg.grid.scale)
            mc = empirical_filter_mse(case.model, case.weight, fs, plan, oracle_mse=oracle.mse)
            row.update({"monte_carlo": mc.empirical_mse, "standard_error": mc.standard_error,
                        "z_score": mc.z_score})
            row["ok"] = bool(row["ok"] and abs(mc.z_score) <= max_z)
        rows.append(row)
    return {"config": _echo(cfg), "table": rows, "passed": all(r["ok"] for r in rows),
            "tolerances": {"route": route_tol, "oracle": oracle_tol, "max_z": max_z,
                           "replicates": replicates}}


def run(cfg: ProblemConfig) -> dict:
    if cfg.mode in ("filter", "filter-finite-T"):
        return run_filter(cfg)
    if cfg.mode.startswith("minimax"):
        return run_minimax(cfg)
    return run_validate(cfg)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="incfilter", description="Filtering of functionals of processes "
                                "with stationary increments from noisy observations.")
    p.add_argument("--config", required=True, help="JSON problem description")
    p.add_argument("--out", required=True, help="result file (JSON)")
    p.add_argument("--mode", choices=MODES, help="override the mode of the config")
    p.add_argument("--seed", type=int, help="override the seed of the config")
    p.add_argument("--grid-scale", type=float, help="multiply all grid resolutions")
    return p


def _write(path: str, result: dict):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(result))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, mode=args.mode, seed=args.seed, grid_scale=args.grid_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoConvergence, NonConverged) as exc:
        print(f"[{exc.module}] no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (RouteMismatch, SaddleViolated) as exc:
        print(f"[{exc.module}] validation mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except IncFilterError as exc:
        print(f"[{exc.module}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _write(args.out, result)
    if not result.get("passed", True):
        print("validation mismatch: see the result file", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
