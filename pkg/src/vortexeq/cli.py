"""Command-line entry point.

Usage::

    vortexeq SUBCOMMAND --config problem.yaml [--out-dir DIR] [--seed N] [--threads N] [--dry-run]

Subcommands: ``energy``, ``grad``, ``simulate``, ``find-eq``, ``fiber-scan``,
``maxn``, ``coupling``, ``check``.  Exit status is 0 on success, 1 on a
configuration or validation error and 2 on a numerical failure.  Output
files are written atomically, JSON with sorted keys; identical config and
seed give byte-identical files.  The config schema is documented in
``docs/config.md``.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np
import yaml

from . import combinatorics as comb
from . import dynamics, equilibrium, fibers
from .energy import (
    Background,
    SourceSet,
    VortexProblem,
    check_theorem_conditions,
    grad_hamiltonian,
    hamiltonian_free,
    hamiltonian_reduced,
    phi,
    psi_pm,
    quantity_A,
    regular_part_sum,
)
from .surface import SingularityError, Surface, make_surface

CONFIG_VERSION = 1
SUBCOMMANDS = ("energy", "grad", "simulate", "find-eq", "fiber-scan", "maxn", "coupling", "check")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

_number = {"type": "number"}
_numbers = {"type": "array", "items": _number}
_points = {"type": "array", "items": _numbers}
_index_sets = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["version"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": CONFIG_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "M": _number,
        "surface": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["sphere", "torus", "projective_plane"]},
                "tau": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "method": {"enum": ["ewald", "theta"]},
            },
        },
        "sources": {
            "type": "object",
            "required": ["alpha"],
            "additionalProperties": False,
            "properties": {"positions": _points, "alpha": _numbers},
        },
        "vortices": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "gamma": {"oneOf": [_number, _numbers]},
                "positions": _points,
            },
        },
        "background": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["zero", "linear", "quadratic", "liouville"]},
                "coefficients": _numbers,
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"grad": _number, "fd_step": _number, "compactness": _number},
        },
        "simulate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_end": _number,
                "step": _number,
                "method": {"enum": ["rk4", "midpoint"]},
                "record_every": {"type": "integer", "minimum": 1},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"starts": {"type": "integer", "minimum": 1}},
        },
        "coupling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "J": _index_sets,
                "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "maxn": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "a": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "alpha": _numbers,
                "mode": {"enum": ["consecutive", "coupling"]},
            },
        },
        "fibers": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target": {"type": "integer", "minimum": 0},
                "angles": _numbers,
                "rho_min": _number,
                "rho_max": _number,
                "points": {"type": "integer", "minimum": 4},
                "delta_samples": {"type": "integer", "minimum": 1},
                "metric": {"enum": ["stereo", "euclidean"]},
            },
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class Context:
    config: dict
    seed: int
    threads: int
    out_dir: Path
    dry_run: bool


# ---------------------------------------------------------------------------
# config parsing


def load_config(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}") from err
    validate_config(data)
    return data


def validate_config(data: Any) -> None:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {err.message}")


def _require(cfg: dict, key: str) -> Any:
    if key not in cfg:
        raise ConfigError(f"config field {key}: required by this subcommand")
    return cfg[key]


def build_surface(cfg: dict) -> Surface:
    s = _require(cfg, "surface")
    params: dict[str, Any] = {}
    if "tau" in s:
        if s["tau"][1] <= 0:
            raise ConfigError("config field surface/tau: imaginary part must be positive")
        params["tau"] = complex(*s["tau"])
    if "method" in s:
        params["method"] = s["method"]
    if s["kind"] != "torus" and params:
        raise ConfigError("config field surface: tau/method apply only to the torus")
    return make_surface(s["kind"], **params)


def _normalize_points(surface: Surface, pts: Any, field: str) -> np.ndarray:
    arr = np.asarray(pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != surface.dim:
        raise ConfigError(f"config field {field}: expected points with {surface.dim} coordinates")
    if surface.dim == 3:
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0):
            raise ConfigError(f"config field {field}: zero vector")
        arr = arr / norms[:, None]
    else:
        arr = surface.canonical(arr)
    return arr


def build_sources(cfg: dict, surface: Surface | None) -> tuple[np.ndarray, SourceSet | None]:
    src = cfg.get("sources")
    if src is None:
        return np.zeros(0), None if surface is None else SourceSet.empty(surface.dim)
    alpha = np.asarray(src["alpha"], dtype=float)
    if np.any(alpha <= 0):
        raise ConfigError("config field sources/alpha: strengths must be positive")
    if surface is None:
        return alpha, None
    if "positions" not in src:
        raise ConfigError("config field sources/positions: required by this subcommand")
    pos = _normalize_points(surface, src["positions"], "sources/positions")
    if pos.shape[0] != alpha.size:
        raise ConfigError("config field sources: positions and alpha differ in length")
    return alpha, SourceSet(pos, alpha)


def vortex_strengths(cfg: dict) -> np.ndarray:
    v = _require(cfg, "vortices")
    gamma = v.get("gamma", 1.0)
    if isinstance(gamma, list):
        g = np.asarray(gamma, dtype=float)
        if "count" in v and v["count"] != g.size:
            raise ConfigError("config field vortices/count: disagrees with the length of gamma")
    else:
        if "count" not in v:
            n = len(v["positions"]) if "positions" in v else None
            if n is None:
                raise ConfigError("config field vortices/count: required with a scalar gamma")
        else:
            n = v["count"]
        g = np.full(n, float(gamma))
    if np.any(g == 0):
        raise ConfigError("config field vortices/gamma: strengths must be nonzero")
    return g


def build_background(cfg: dict, surface: Surface) -> Background | None:
    bg = cfg.get("background")
    if bg is None or bg["kind"] == "zero":
        return None
    if bg["kind"] == "liouville":
        return Background.liouville(surface)
    coef = np.asarray(bg.get("coefficients", []), dtype=float)
    if coef.size != surface.dim:
        raise ConfigError(f"config field background/coefficients: expected {surface.dim} numbers")
    if surface.dim != 3:
        raise ConfigError("config field background/kind: polynomial backgrounds need the round models")
    if bg["kind"] == "linear":
        return Background(h=lambda x: x @ coef, grad_h=lambda x: np.broadcast_to(coef, x.shape).copy())
    return Background(h=lambda x: (x * x) @ coef, grad_h=lambda x: 2.0 * x * coef)


def build_coupling(cfg: dict, ell: int) -> tuple[comb.CouplingSpec, list[int] | None]:
    c = cfg.get("coupling", {})
    try:
        coupling = comb.CouplingSpec(tuple(frozenset(j) for j in c["J"])) if "J" in c else comb.CouplingSpec.consecutive(ell)
    except ValueError as err:
        raise ConfigError(f"config field coupling/J: {err}") from err
    if coupling.ell != ell:
        raise ConfigError(f"config field coupling/J: has {coupling.ell} sets, expected {ell}")
    counts = c.get("counts")
    if counts is not None and len(counts) != ell:
        raise ConfigError(f"config field coupling/counts: expected {ell} entries")
    return coupling, counts


def build_problem(cfg: dict) -> VortexProblem:
    surface = build_surface(cfg)
    _, sources = build_sources(cfg, surface)
    return VortexProblem(surface, vortex_strengths(cfg), sources, build_background(cfg, surface) or Background())


def initial_positions(cfg: dict, problem: VortexProblem, rng: np.random.Generator) -> np.ndarray:
    v = cfg["vortices"]
    if "positions" in v:
        pos = _normalize_points(problem.surface, v["positions"], "vortices/positions")
        if pos.shape[0] != problem.n_vortices:
            raise ConfigError("config field vortices/positions: count disagrees with gamma")
        return pos
    return problem.surface.sample(rng, problem.n_vortices)


def _tol(cfg: dict, key: str, default: float) -> float:
    return float(cfg.get("tolerances", {}).get(key, default))


# ---------------------------------------------------------------------------
# output


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def emit_json(ctx: Context, name: str, obj: Any) -> Path:
    path = ctx.out_dir / name
    write_atomic(path, dump_json(obj))
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_energy(ctx: Context) -> dict:
    cfg = ctx.config
    problem = build_problem(cfg)
    x = initial_positions(cfg, problem, np.random.default_rng(ctx.seed))
    if ctx.dry_run:
        return {}
    c = problem.config(x)
    src, bg = problem.sources, problem.background
    out: dict[str, Any] = {"seed": ctx.seed, "positions": x, "gamma": problem.strengths}
    out["hamiltonian_free"] = hamiltonian_free(c)
    if np.all(problem.strengths > 0):
        out["hamiltonian"] = hamiltonian_reduced(c, src, bg)
        out["phi"] = phi(c, src, bg)
        out["regular_part"] = regular_part_sum(c, src, bg)
    out["psi_plus"] = psi_pm(c, src, +1)
    out["psi_minus"] = psi_pm(c, src, -1)
    if np.allclose(problem.strengths, 1.0):
        out["A"] = quantity_A(c, src, Background())
    emit_json(ctx, "energy.json", out)
    return out


def cmd_grad(ctx: Context) -> dict:
    cfg = ctx.config
    problem = build_problem(cfg)
    x = initial_positions(cfg, problem, np.random.default_rng(ctx.seed))
    if ctx.dry_run:
        return {}
    g = grad_hamiltonian(problem.config(x), problem.sources, problem.background)
    out = {"seed": ctx.seed, "positions": x, "gradient": g, "grad_norm": float(np.linalg.norm(g))}
    emit_json(ctx, "grad.json", out)
    return out


def cmd_simulate(ctx: Context) -> dict:
    cfg = ctx.config
    problem = build_problem(cfg)
    x = initial_positions(cfg, problem, np.random.default_rng(ctx.seed))
    sim = cfg.get("simulate", {})
    t_end = float(sim.get("t_end", 1.0))
    step = float(sim.get("step", 1e-3))
    if t_end <= 0 or step <= 0:
        raise ConfigError("config field simulate: t_end and step must be positive")
    if ctx.dry_run:
        return {}
    traj = dynamics.integrate(
        problem.config(x), problem.sources, problem.background, t_end, step,
        sim.get("method", "rk4"), record_every=int(sim.get("record_every", 1)),
    )
    write_atomic(ctx.out_dir / "trajectory.csv", traj.to_csv())
    out = {
        "seed": ctx.seed,
        "status": traj.status,
        "message": traj.message,
        "samples": len(traj),
        "energy_drift": dynamics.relative_energy_drift(traj),
        "moment_drift": dynamics.moment_drift(traj),
        "columns": traj.header(),
    }
    emit_json(ctx, "simulate.json", out)
    if traj.halted:
        raise NumericalFailure(f"integration halted: {traj.message}")
    return out


def cmd_find_eq(ctx: Context) -> dict:
    cfg = ctx.config
    problem = build_problem(cfg)
    if "M" not in cfg:
        raise ConfigError("config field M: required by find-eq")
    starts = int(cfg.get("search", {}).get("starts", 20))
    if ctx.dry_run:
        return {}
    res = equilibrium.find_critical_points(
        problem, float(cfg["M"]), starts, ctx.seed, _tol(cfg, "grad", 1e-8), ctx.threads,
        fd_step=_tol(cfg, "fd_step", equilibrium.DEFAULT_FD_STEP),
    )
    write_atomic(ctx.out_dir / "critical_points.json", res.to_json() + "\n")
    out = {
        "seed": ctx.seed,
        "M": res.M,
        "starts": res.starts,
        "converged": res.converged,
        "seed_failures": res.seed_failures,
        "distinct": len(res),
    }
    emit_json(ctx, "find_eq.json", out)
    return out


def cmd_fiber_scan(ctx: Context) -> dict:
    cfg = ctx.config
    alpha, _ = build_sources(cfg, None)
    ell = alpha.size
    if ell < 2:
        raise ConfigError("config field sources/alpha: fiber scans need at least two anchors")
    gamma = vortex_strengths(cfg)
    coupling, counts = build_coupling(cfg, ell)
    if counts is None:
        raise ConfigError("config field coupling/counts: required by fiber-scan")
    fcfg = cfg.get("fibers", {})
    target = int(fcfg.get("target", 0))
    if target >= ell:
        raise ConfigError("config field fibers/target: out of range")
    try:
        layout = fibers.layout_from_coupling(
            coupling, counts, gamma.tolist(), alpha.tolist(), target, fcfg.get("angles"),
            metric=fcfg.get("metric", "stereo"),
        )
    except fibers.FiberError as err:
        raise ConfigError(f"config field fibers: {err}") from err
    rho_min, rho_max = float(fcfg.get("rho_min", 1e-6)), float(fcfg.get("rho_max", 1e-3))
    if not 0 < rho_min < rho_max:
        raise ConfigError("config field fibers: need 0 < rho_min < rho_max")
    if ctx.dry_run:
        return {}
    rhos = np.logspace(np.log10(rho_min), np.log10(rho_max), int(fcfg.get("points", 16)))
    _, psi = fibers.collapse_trace(layout.config, rhos)
    slope, predicted = fibers.collapse_slope(layout, rhos)
    buf = io.StringIO()
    fibers.write_collapse_csv(buf, rhos, psi)
    write_atomic(ctx.out_dir / "fiber_collapse.csv", buf.getvalue())
    ordered = comb.order_blocks(coupling)
    table = fibers.intersection_table(ordered.coupling, require_order=False)
    write_atomic(ctx.out_dir / "fiber_intersections.csv", table.to_csv())
    deltas = []
    samples = int(fcfg.get("delta_samples", 10_000))
    for a, b in itertools.combinations(range(len(layout.fibers)), 2):
        res = fibers.separation_delta(layout.fibers[a], layout.fibers[b], samples, seed=ctx.seed)
        deltas.append({"vortices": [a, b], "kind": res.kind, "shared": list(res.shared), "delta": res.delta})
    out = {
        "seed": ctx.seed,
        "target": target,
        "collapsing": list(layout.collapsing),
        "slope": slope,
        "predicted": predicted,
        "relative_error": abs(slope - predicted) / max(abs(predicted), 1e-300),
        "order": list(ordered.order),
        "order_satisfied": ordered.satisfied,
        "intersections_match": table.all_match,
        "separation": deltas,
    }
    emit_json(ctx, "fiber_scan.json", out)
    return out


def _capacity_from(cfg: dict) -> comb.CapacityVector:
    m = _require(cfg, "maxn")
    if "a" in m:
        return comb.CapacityVector(tuple(m["a"]))
    if "alpha" in m:
        try:
            return comb.capacity(m["alpha"])
        except ValueError as err:
            raise ConfigError(f"config field maxn/alpha: {err}") from err
    raise ConfigError("config field maxn: give either a or alpha")


def cmd_maxn(ctx: Context) -> dict:
    cfg = ctx.config
    a = _capacity_from(cfg)
    if a.ell < 2:
        raise ConfigError("config field maxn: need at least two capacities")
    mode = cfg["maxn"].get("mode", "consecutive")
    coupling = build_coupling(cfg, a.ell)[0] if mode == "coupling" else None
    if ctx.dry_run:
        return {}
    res = comb.max_n_exact(a, "consecutive" if coupling is None else coupling)
    out = res.as_dict()
    emit_json(ctx, "maxn.json", out)
    return out


def cmd_coupling(ctx: Context) -> dict:
    cfg = ctx.config
    alpha, _ = build_sources(cfg, None)
    ell = alpha.size
    coupling, counts = build_coupling(cfg, ell)
    if ctx.dry_run:
        return {}
    ordered = comb.order_blocks(coupling)
    out: dict[str, Any] = {
        "ell": ell,
        "J": [sorted(j) for j in coupling.J],
        "r": list(coupling.r),
        "blocks": coupling.blocks(),
        "order": list(ordered.order),
        "order_satisfied": ordered.satisfied,
        "order_violations": [list(v) for v in ordered.violations],
    }
    if counts is not None:
        feas = comb.coupling_feasible(alpha.tolist(), counts, coupling)
        out["feasible"] = feas.feasible
        out["slack"] = feas.slack
    if ell <= 6:
        best = comb.best_coupling_search(alpha.tolist())
        out["best_n"] = best.best.n_exact
        out["best_J"] = [sorted(j) for j in best.best_coupling.J]
        out["best_single_cycle_n"] = best.best_single_cycle.n_exact
        out["non_consecutive_strictly_better"] = best.non_consecutive_strictly_better
    emit_json(ctx, "coupling.json", out)
    return out


def cmd_check(ctx: Context) -> dict:
    cfg = ctx.config
    alpha, _ = build_sources(cfg, None)
    gamma = vortex_strengths(cfg)
    coupling, counts = build_coupling(cfg, alpha.size) if alpha.size >= 2 else (None, None)
    kind = cfg.get("surface", {}).get("kind", "sphere")
    if ctx.dry_run:
        return {}
    report = check_theorem_conditions(
        gamma.tolist(), alpha.tolist(), kind, coupling, counts, tol=_tol(cfg, "compactness", 1e-9)
    )
    out = report.as_dict()
    out["seed"] = ctx.seed
    if np.allclose(gamma, 1.0) and "surface" in cfg and "positions" in cfg.get("sources", {}):
        problem = build_problem(cfg)
        x = initial_positions(cfg, problem, np.random.default_rng(ctx.seed))
        out["A"] = quantity_A(problem.config(x), problem.sources, Background())
    emit_json(ctx, "check.json", out)
    return out


class NumericalFailure(RuntimeError):
    """A computation ran but could not produce a valid result."""


COMMANDS: dict[str, Callable[[Context], dict]] = {
    "energy": cmd_energy,
    "grad": cmd_grad,
    "simulate": cmd_simulate,
    "find-eq": cmd_find_eq,
    "fiber-scan": cmd_fiber_scan,
    "maxn": cmd_maxn,
    "coupling": cmd_coupling,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortexeq", description="Point-vortex equilibrium toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="YAML problem description")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for multi-start search")
    parser.add_argument("--dry-run", action="store_true", help="validate the config and exit")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if seed < 0:
            raise ConfigError("--seed must be nonnegative")
        ctx = Context(cfg, seed, args.threads, Path(args.out_dir), args.dry_run)
        out = COMMANDS[args.subcommand](ctx)
    except (SingularityError, NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OverflowError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_INVALID
    if args.dry_run:
        print(f"{args.subcommand}: config valid")
    else:
        print(dump_json(out), end="")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
