"""Command-line front end.

Every subcommand takes either flags or ``--config run.json``; flags given on
the command line override the config.  Relative paths inside a config are
resolved against the config file's directory.  Artifacts embed the config,
its sha256 and the root seed, and are byte-identical across replays and
thread counts.

Exit codes: 0 success, 1 invalid config, 2 infeasible target, 3 no feasible
point within the budget.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .average_correction import CorrectionParams, correct_average
from .cell_problem import Budget, CellSpec, convexity_scan, estimate_ghom, relaxed_cell, solve_cell
from .energy import EnergyModel, total_energy
from .errors import (
    BudgetExhausted,
    ConfigError,
    InfeasibleTarget,
    InvalidParams,
    NotEnoughDiscord,
    OutOfBall,
    TargetOnSphere,
)
from .kernels import kernel_from_config
from .sphere_geom import decompose_into_unit_sum, random_unit

log = logging.getLogger("spinhom")

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_BUDGET = 1, 2, 3
BUDGET_KEYS = ("restarts", "sweeps", "seed", "polish_iters", "cooling", "max_redraws", "projection")


# -- config plumbing ---------------------------------------------------------

class Run:
    """A parsed config plus the directory its relative paths refer to."""

    def __init__(self, cfg: dict, base: Path, args: argparse.Namespace):
        self.cfg = cfg
        self.base = base
        self.args = args

    def get(self, key, default=None, required=False):
        if key in self.cfg and self.cfg[key] is not None:
            return self.cfg[key]
        if required:
            raise ConfigError(f"{key}: missing")
        return default

    def path(self, key, required=True, must_exist=True) -> Path | None:
        raw = self.get(key, required=required)
        if raw is None:
            return None
        p = Path(raw)
        if not p.is_absolute():
            p = self.base / p
        if must_exist and not p.exists():
            raise ConfigError(f"{key}: file not found: {raw}")
        return p

    def vector(self, key, required=True) -> np.ndarray | None:
        raw = self.get(key, required=required)
        if raw is None:
            return None
        try:
            v = np.asarray([float(c) for c in raw], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a list of numbers, got {raw!r}") from None
        if v.size < 2:
            raise ConfigError(f"{key}: dimension N must be >= 2")
        return v

    def integer(self, key, default=None, minimum=None) -> int:
        raw = self.get(key, default, required=default is None)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        if minimum is not None and raw < minimum:
            raise ConfigError(f"{key}: must be >= {minimum}, got {raw}")
        return raw

    def kernel(self):
        spec = self.get("kernel", required=True)
        if isinstance(spec, str):
            p = self.path("kernel")
            try:
                spec = json.loads(p.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"kernel: {p} is not valid JSON: {exc}") from None
            spec = spec.get("kernel", spec)
            return kernel_from_config(spec, p.parent), spec
        return kernel_from_config(spec, self.base), spec

    def budget(self) -> Budget:
        raw = dict(self.get("budget", {}))
        unknown = set(raw) - set(BUDGET_KEYS)
        if unknown:
            raise ConfigError(f"budget.{sorted(unknown)[0]}: unknown key")
        if self.args.seed is not None:
            raw["seed"] = self.args.seed
        try:
            return Budget(**raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"budget: {exc}") from None

    def meta(self) -> dict:
        return {"config_sha256": io.config_hash(self.cfg)}


def _parse_csv_vector(text: str) -> list[float]:
    try:
        return [float(c) for c in text.split(",")]
    except ValueError:
        raise ConfigError(f"vector: cannot parse {text!r}") from None


def _abs(path: str | None) -> str | None:
    """Command-line paths are relative to the working directory, not the config."""
    return None if path is None else str(Path(path).resolve())


def _load(args: argparse.Namespace, overrides: dict) -> Run:
    cfg: dict = {}
    base = Path.cwd()
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise ConfigError(f"config: file not found: {args.config}")
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be an object")
        base = p.resolve().parent
        sub = cfg.get("subcommand")
        if sub is not None and sub != args.command:
            raise ConfigError(f"subcommand: config is for {sub!r}, not {args.command!r}")
    cfg = {k: v for k, v in cfg.items() if k != "subcommand"}
    for k, v in overrides.items():
        if v is not None:
            cfg[k] = v
    if args.seed is not None:
        cfg["seed"] = args.seed
    return Run(cfg, base, args)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SPINHOM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SPINHOM_THREADS: expected an integer, got {env!r}") from None
    return 1


def _out(run: Run, key="out") -> Path | None:
    if run.args.out is not None and key == "out":
        return Path(run.args.out)
    return run.path(key, required=False, must_exist=False)


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _envelope(run: Run, seed, payload: dict) -> dict:
    return {"config": run.cfg, "config_sha256": io.config_hash(run.cfg), "seed": seed, **payload}


# -- subcommands -------------------------------------------------------------

def cmd_decompose(args) -> int:
    run = _load(args, {
        "dim": args.dim, "k": args.k,
        "vector": None if args.vector is None else _parse_csv_vector(args.vector),
    })
    k = run.integer("k", minimum=2)
    u = run.vector("vector", required=False)
    seed = run.get("seed", 0)
    if u is None:
        N = run.integer("dim", minimum=2)
        rng = np.random.default_rng(seed)
        u = random_unit(N, seed) * k * rng.random()
    elif run.get("dim") is not None and int(run.get("dim")) != u.size:
        raise ConfigError(f"dim: {run.get('dim')} does not match the vector length {u.size}")
    vs = decompose_into_unit_sum(u, k)
    body = "".join(",".join(io.fmt(x) for x in v) + "\n" for v in vs)
    out = _out(run)
    if out is not None:
        body = f"# config_sha256={io.config_hash(run.cfg)}\n# seed={seed}\n" + body
    _emit(body, out)
    return 0


def cmd_correct_average(args) -> int:
    run = _load(args, {
        "field": _abs(args.field),
        "target": None if args.target is None else _parse_csv_vector(args.target),
        "b": args.b, "c": args.c, "report": _abs(args.report),
    })
    f = io.read_field(run.path("field"))
    z = run.vector("target")
    if z.size != f.N:
        raise ConfigError(f"target: dimension {z.size} does not match field N = {f.N}")
    b, c = run.get("b"), run.get("c")
    if (b is None) != (c is None):
        raise ConfigError("b: b and c must be given together")
    try:
        params = None if b is None else CorrectionParams(float(b), float(c))
    except InvalidParams as exc:
        raise ConfigError(f"b: {exc}") from None
    g, report = correct_average(f, z, params)
    seed = run.get("seed")
    _emit(io.write_field(g, meta=run.meta() | {"seed": seed}), _out(run))
    rpath = _out(run, "report")
    if rpath is not None:
        _emit(io.dump_json(_envelope(run, seed, {"report": report.to_json(f)})), rpath)
    return 0


def cmd_energy(args) -> int:
    run = _load(args, {"field": _abs(args.field), "kernel": _abs(args.kernel)})
    f = io.read_field(run.path("field"))
    kernel, _ = run.kernel()
    bd = total_energy(f, kernel)
    payload = bd.to_json() | {"bond_count": EnergyModel(f.domain, kernel).bond_count,
                              "n_nodes": f.domain.n_nodes}
    _emit(io.dump_json(_envelope(run, run.get("seed"), payload)), _out(run))
    return 0


def _cell_spec(run: Run, kernel, z=None, T=None) -> CellSpec:
    z = run.vector("z") if z is None else z
    try:
        return CellSpec(
            run.integer("T", minimum=2) if T is None else T, z, kernel,
            m=run.integer("m", 1, minimum=1), eta=run.get("eta"), offset=run.get("offset", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"T: {exc}") from None


def _check_ball(z):
    zn = float(np.linalg.norm(z))
    if zn > 1.0 + 1e-12:
        raise InfeasibleTarget(f"|z| = {zn!r} > 1")


def cmd_cell_solve(args) -> int:
    run = _load(args, {})
    kernel, _ = run.kernel()
    spec = _cell_spec(run, kernel)
    _check_ball(spec.z)
    budget = run.budget()
    threads = _threads(args)
    if spec.sharp:
        res = solve_cell(spec, budget, threads)
    else:
        init = run.path("init", required=False)
        res = relaxed_cell(spec, budget, threads, None if init is None else io.read_field(init))
    field_out = _out(run, "minimizer_out")
    if field_out is not None:
        io.write_field(res.minimizer, field_out, run.meta() | {"seed": budget.seed})
    payload = {"result": res.to_json(), "minimizer": res.minimizer.values.tolist()}
    _emit(io.dump_json(_envelope(run, budget.seed, payload)), _out(run))
    return 0


def cmd_ghom_scan(args) -> int:
    run = _load(args, {})
    kernel, _ = run.kernel()
    z = run.vector("z")
    _check_ball(z)
    schedule = run.get("schedule", required=True)
    budget = run.budget()
    try:
        curve = estimate_ghom(kernel, z, schedule, budget, run.integer("m", 1, minimum=1), _threads(args))
    except ValueError as exc:
        if isinstance(exc, InfeasibleTarget):
            raise
        raise ConfigError(f"schedule: {exc}") from None
    meta = run.meta() | {
        "seed": budget.seed,
        "extrapolated": io.fmt(curve.extrapolated),
        "slope": io.fmt(curve.slope),
        "fit_residual": io.fmt(curve.residual),
        "unweighted_extrapolated": io.fmt(curve.unweighted_extrapolated),
        "config": io.canonical_json(run.cfg),
    }
    rows = [(T, float(r.value), float(r.constraint_residual), r.best_restart_seed)
            for (T, _), r in zip(curve.points, curve.results)]
    _emit(io.write_csv(["T", "value", "residual", "seed"], rows, meta=meta), _out(run))
    return 0


def _z_pairs(run: Run):
    pairs = run.get("z_pairs")
    if pairs is not None:
        out = []
        for i, p in enumerate(pairs):
            if len(p) != 2:
                raise ConfigError(f"z_pairs[{i}]: expected [z1, z2]")
            out.append((np.asarray(p[0], float), np.asarray(p[1], float)))
        return out
    rnd = run.get("random_pairs", required=True)
    count, N = int(rnd.get("count", 1)), int(rnd.get("N", 2))
    radius = float(rnd.get("radius", 0.9))
    rng = np.random.default_rng(run.get("seed", 0) if run.args.seed is None else run.args.seed)
    out = []
    for _ in range(count):
        zz = [random_unit(N, int(rng.integers(2**32))) * radius * rng.random() for _ in range(2)]
        out.append((zz[0], zz[1]))
    return out


def cmd_convexity_check(args) -> int:
    run = _load(args, {})
    kernel, _ = run.kernel()
    pairs = _z_pairs(run)
    for z1, z2 in pairs:
        _check_ball(z1)
        _check_ball(z2)
    budget = run.budget()
    T = run.get("T", required=True)
    rows = convexity_scan(
        kernel, pairs, run.get("t_grid", [0.5]), T, budget,
        m=run.integer("m", 1, minimum=1), k=run.integer("k", 8, minimum=2),
        h=run.integer("h", 32, minimum=2), threads=_threads(args),
    )
    N = len(pairs[0][0]) if pairs else 2
    header = ([f"z1_{j + 1}" for j in range(N)] + [f"z2_{j + 1}" for j in range(N)]
              + ["t", "g_mid", "g_chord", "tolerance", "violation",
                 "certificate_value", "certificate_bound", "certificate_holds"])
    table = [
        [*map(float, r.z1), *map(float, r.z2), r.t, r.g_mid, r.g_chord, r.tolerance,
         int(r.violation), r.certificate_value, r.certificate_bound, int(r.certificate_holds)]
        for r in rows
    ]
    meta = run.meta() | {"seed": budget.seed, "config": io.canonical_json(run.cfg)}
    _emit(io.write_csv(header, table, meta=meta), _out(run))
    return 0


COMMANDS = {
    "decompose": cmd_decompose,
    "correct-average": cmd_correct_average,
    "energy": cmd_energy,
    "cell-solve": cmd_cell_solve,
    "ghom-scan": cmd_ghom_scan,
    "convexity-check": cmd_convexity_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int, help="root seed (overrides the config)")
    common.add_argument("--threads", type=int, help="worker threads (env SPINHOM_THREADS)")
    common.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="spinhom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="write a ball vector as a sum of k unit vectors")
    d.add_argument("--dim", type=int)
    d.add_argument("--k", type=int)
    d.add_argument("--vector", help="comma-separated components")

    c = sub.add_parser("correct-average", parents=[common], help="sparse exact average correction")
    c.add_argument("--field")
    c.add_argument("--target", help="comma-separated components")
    c.add_argument("--b", type=float)
    c.add_argument("--c", type=float)
    c.add_argument("--report")

    e = sub.add_parser("energy", parents=[common], help="lattice energy with per-xi breakdown")
    e.add_argument("--field")
    e.add_argument("--kernel", help="kernel config JSON")

    sub.add_parser("cell-solve", parents=[common], help="solve one cell problem")
    sub.add_parser("ghom-scan", parents=[common], help="cell problems over a T schedule")
    sub.add_parser("convexity-check", parents=[common], help="convexity table with certificates")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleTarget, TargetOnSphere, NotEnoughDiscord, OutOfBall) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
