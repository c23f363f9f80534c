"""Command line front end.

    wavefront {solve,verify,cstar,simulate,counterexample} --config run.json [--out DIR] [--seed N]

Exit codes: 0 ok, 2 invalid input, 3 certification failure, 4 convergence
failure, 5 simulation failure.  CSV floats are written with 17 significant
digits; JSON and stdout use the shortest round-trip representation.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import models as ml
from .engine import BudgetError, check_quasi_monotone, iterate
from .errors import (
    CertificationError,
    ConfigurationError,
    InputError,
    MonotonicityError,
    ParameterError,
    PreconditionError,
    SimulationError,
    WavefrontError,
)
from .pde import SimConfig, manufactured_translation, profile_drift, simulate, transition_width
from .perron import (
    Grid,
    Profile,
    TailSpec,
    counterexample_nonuniqueness,
    ma_identity_discrepancy,
    tail_window,
)

EXIT_OK, EXIT_INPUT, EXIT_CERT, EXIT_CONV, EXIT_SIM = 0, 2, 3, 4, 5

PP_KEYS = ("d1", "d2", "r", "P", "a", "b", "nu", "tau")
BZ_KEYS = ("r", "b", "tau")
MODELS = {"predator_prey": PP_KEYS, "belousov_zhabotinskii": BZ_KEYS}


@dataclass
class RunConfig:
    """Flat run description; model parameters sit at the top level next to the run settings."""

    model: str
    params: dict
    c: float = 0.0
    L: float = 0.0
    h: float = 0.02
    epsilon: float = 1e-8
    max_steps: int = 1000
    trials: int = 100_000
    seed: int = 0
    output_dir: str = "out"
    strict: bool = False
    sim_T: float = 10.0
    sim_dx: float = 0.05
    sim_dt: float = 0.0
    sim_x_left: Optional[float] = None
    sim_x_right: Optional[float] = None
    sim_snapshot_every: float = 0.1
    sim_write_every: float = 1.0
    self_test: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a JSON object")
        raw = dict(raw)
        model = raw.pop("model", None)
        if model not in MODELS:
            raise ConfigurationError(f"model must be one of {sorted(MODELS)}, got {model!r}")
        params = {k: float(raw.pop(k)) for k in MODELS[model] if k in raw}
        known = {f.name for f in dataclasses.fields(cls)} - {"model", "params"}
        extra = set(raw) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(model, params, **raw)
        if cfg.c < 0 or cfg.L < 0 or cfg.h <= 0 or cfg.epsilon <= 0 or cfg.max_steps < 1:
            raise ConfigurationError("need c >= 0, L >= 0, h > 0, epsilon > 0, max_steps >= 1")
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)


@dataclass
class Setup:
    """Everything derived from a config before any heavy computation."""

    cfg: RunConfig
    params: object
    c: float
    model: object
    grid: Grid


def build_params(cfg: RunConfig):
    p = dict(cfg.params)
    if cfg.model == "predator_prey":
        missing = [k for k in PP_KEYS[:-1] if k not in p]
        if missing:
            raise ConfigurationError(f"missing predator-prey parameters {missing}")
        return ml.PredatorPreyParams(**p)
    missing = [k for k in BZ_KEYS[:-1] if k not in p]
    if missing:
        raise ConfigurationError(f"missing BZ parameters {missing}")
    return ml.BZParams(**p)


def resolve_speed(cfg: RunConfig, params) -> float:
    """c = 0 selects 10% above the speed threshold (and above the real-rate bound)."""
    if cfg.c > 0:
        return cfg.c
    if isinstance(params, ml.PredatorPreyParams):
        return 1.1 * max(ml.pp_cstar(params), 2 * math.sqrt(params.d1 * params.r))
    return 1.1 * ml.bz_speed_floor(params)


def setup(cfg: RunConfig) -> Setup:
    params = build_params(cfg)
    c = resolve_speed(cfg, params)
    model = ml.pp_model(params, c) if isinstance(params, ml.PredatorPreyParams) else ml.bz_model(params, c)
    L = cfg.L
    if L == 0:
        L = 10 * math.ceil(tail_window(model.kernels()) / 10)
    grid = Grid.symmetric(L, cfg.h)
    return Setup(cfg, params, c, model, grid)


def constructions(s: Setup):
    if isinstance(s.params, ml.PredatorPreyParams):
        up = ml.pp_upper(s.params, s.c, s.grid, s.model, strict=s.cfg.strict)
        lo = ml.pp_lower(s.params, s.c, grid=s.grid, model=s.model, upper=up, strict=s.cfg.strict)
    else:
        up = ml.bz_upper(s.params, s.c, s.grid, s.model, strict=s.cfg.strict)
        lo = ml.bz_lower(s.params, s.c, grid=s.grid, model=s.model, upper=up, strict=s.cfg.strict)
    return up, lo


def _pair_dict(pair):
    return {
        "construction": pair.construction,
        "report": pair.report.as_dict(),
        "fronts": [dataclasses.asdict(f) for f in pair.fronts],
        "rejected": [{"construction": lab, "report": rep.as_dict() if rep else None} for lab, rep in pair.rejected],
    }


# --- file output --------------------------------------------------------------------


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_profile(path: Path, profile: Profile):
    header = ["t"] + [f"phi{i + 1}" for i in range(profile.n)]
    write_csv(path, header, zip(profile.grid.nodes, *profile.values))


def tails_dict(t: TailSpec) -> dict:
    return {k: getattr(t, k).tolist() for k in ("left_limit", "right_limit", "decay_rate_left", "decay_rate_right")}


def read_profile(path: Path, tails: dict, grid: dict) -> Profile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    grid = Grid(**grid)
    if grid.count != data.shape[0]:
        raise InputError("profile.csv does not match the recorded grid")
    return Profile(grid, data[:, 1:].T, TailSpec.make(data.shape[1] - 1, **tails))


def write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_trace(path: Path, report):
    write_csv(
        path,
        ["step", "delta", "residual", "violation"],
        ([i, float(d), float(r), float(v)] for i, d, r, v in report.trace_rows()),
    )


def write_snapshots(directory: Path, result, every: float = 0.0):
    """One CSV per snapshot, thinned to roughly one file per `every` time units."""
    directory.mkdir(parents=True, exist_ok=True)
    n = result.snapshots.shape[1]
    header = ["t", "x"] + [f"u{i + 1}" for i in range(n)]
    last = -math.inf
    for k, (t, u) in enumerate(zip(result.times, result.snapshots)):
        if t - last < every - 1e-9 and k != len(result.times) - 1:
            continue
        last = t
        rows = ([float(t), float(x), *map(float, col)] for x, col in zip(result.x, u.T))
        write_csv(directory / f"snapshot_{k:05d}.csv", header, rows)


# --- commands -----------------------------------------------------------------------


def cmd_cstar(cfg: RunConfig, out=None) -> int:
    params = build_params(cfg)
    if isinstance(params, ml.PredatorPreyParams):
        value, branch = ml.pp_cstar_branch(params)
        note = " (Corollary branch)" if branch == "corollary" else ""
        print(f"c* = {value!r}{note}", file=out)
    else:
        print(f"admissible c > max(2, {params.b!r}) = {ml.bz_speed_floor(params)!r}", file=out)
    return EXIT_OK


def verify(s: Setup) -> dict:
    out = {"model": s.model.name, "c": s.c, "beta": s.model.beta.tolist(), "grid": {"L": s.grid.right, "h": s.grid.h}}
    qm = check_quasi_monotone(s.model, s.cfg.trials, s.cfg.seed)
    out["quasi_monotone"] = {"min_value": qm, "passed": qm >= -1e-9, "trials": s.cfg.trials, "seed": s.cfg.seed}
    try:
        up, lo = constructions(s)
        out["upper"], out["lower"] = _pair_dict(up), _pair_dict(lo)
    except CertificationError as exc:
        out["error"] = str(exc)
        up = lo = None
    out["passed"] = bool(out["quasi_monotone"]["passed"] and up is not None)
    return out, up, lo


def cmd_verify(cfg: RunConfig, out=None) -> int:
    s = setup(cfg)
    result, _, _ = verify(s)
    print(json.dumps(result, indent=2, sort_keys=True), file=out)
    return EXIT_OK if result["passed"] else EXIT_CERT


def cmd_solve(cfg: RunConfig, out=None) -> int:
    s = setup(cfg)
    odir = Path(cfg.output_dir)
    t0 = time.perf_counter()
    ver, up, lo = verify(s)
    t_verify = time.perf_counter() - t0
    summary = {"verification": ver, "config": dataclasses.asdict(cfg), "c": s.c}
    if not ver["passed"]:
        summary["status"] = "certification_failed"
        write_json(odir / "summary.json", summary)
        print(f"certification failed for {s.model.name}; see {odir / 'summary.json'}", file=out)
        return EXIT_CERT
    t1 = time.perf_counter()
    try:
        rep = iterate(s.model, up.profile(s.grid), lo.profile(s.grid), cfg.epsilon, cfg.max_steps)
        code, status = EXIT_OK, "converged"
    except (MonotonicityError, BudgetError) as exc:
        rep, code, status = exc.report, EXIT_CONV, f"{type(exc).__name__}: {exc}"
    t_iter = time.perf_counter() - t1
    prof = rep.final_profile
    write_profile(odir / "profile.csv", prof)
    write_trace(odir / "trace.csv", rep)
    summary.update(
        status=status,
        steps=rep.steps,
        converged=rep.converged,
        final_delta=rep.deltas[-1],
        final_residual=rep.residuals[-1],
        max_ordering_violation=max(rep.ordering_violations),
        max_derivative_ratio=max(rep.derivative_ratios),
        boundary_left=prof.values[:, 0].tolist(),
        boundary_right=prof.values[:, -1].tolist(),
        tails=tails_dict(prof.tails),
        grid={"left": prof.grid.left, "h": prof.grid.h, "count": prof.grid.count},
    )
    write_json(odir / "summary.json", summary)
    write_json(odir / "timings.json", {"verify_s": t_verify, "iterate_s": t_iter})
    print(f"{status}: {rep.steps} steps, delta {rep.deltas[-1]!r}, residual {rep.residuals[-1]!r}", file=out)
    return code


def cmd_simulate(cfg: RunConfig, out=None) -> int:
    odir = Path(cfg.output_dir)
    if not cfg.sim_T > 0:
        raise ConfigurationError("sim_T must be positive")
    if not (odir / "profile.csv").exists() or not (odir / "summary.json").exists():
        code = cmd_solve(cfg, out)
        if code != EXIT_OK:
            return code
    summary = json.loads((odir / "summary.json").read_text())
    if not summary.get("converged"):
        print("no converged profile to simulate", file=out)
        return EXIT_CONV
    s = setup(cfg)
    prof = read_profile(odir / "profile.csv", summary["tails"], summary["grid"])
    phi = prof.evaluate
    width = transition_width(phi, s.model.K[0])
    auto = SimConfig.for_front(width, s.c, cfg.sim_T, cfg.sim_dx, D=s.model.D)
    sim = SimConfig(
        auto.x_left if cfg.sim_x_left is None else cfg.sim_x_left,
        auto.x_right if cfg.sim_x_right is None else cfg.sim_x_right,
        cfg.sim_dx,
        cfg.sim_dt if cfg.sim_dt > 0 else auto.dt,
        cfg.sim_T,
        cfg.sim_snapshot_every,
    )
    t0 = time.perf_counter()
    if cfg.self_test:
        res = manufactured_translation(phi, s.c, s.model.K[0], sim)
    else:
        res = simulate(s.model, prof, sim)
    drift = profile_drift(res, phi, s.c)
    write_snapshots(odir / "snapshots", res, cfg.sim_write_every)
    summary["simulation"] = {
        "self_test": cfg.self_test,
        "config": dataclasses.asdict(sim),
        "measured_speed": res.measured_speed,
        "speed_r2": res.speed_r2,
        "relative_speed_error": abs(res.measured_speed - s.c) / s.c,
        "profile_drift": drift,
        "drift_over_K": drift / float(np.max(s.model.K)),
        "front_positions": [list(p) for p in res.front_positions],
    }
    write_json(odir / "summary.json", summary)
    timings_path = odir / "timings.json"
    timings = json.loads(timings_path.read_text()) if timings_path.exists() else {}
    timings["simulate_s"] = time.perf_counter() - t0
    write_json(timings_path, timings)
    print(f"measured speed {res.measured_speed!r} (c = {s.c!r}), drift {drift!r}", file=out)
    return EXIT_OK


def cmd_counterexample(cfg: Optional[RunConfig], out=None) -> int:
    grid = Grid.symmetric(10.0, 0.01)
    ce = counterexample_nonuniqueness(grid)
    ma = ma_identity_discrepancy(grid)
    result = {
        "nonuniqueness": dataclasses.asdict(ce),
        "identity": {"at_zero": ma.at_zero, "max_abs": ma.max_abs},
        "grid": {"L": grid.right, "h": grid.h},
    }
    print(json.dumps(result, indent=2, sort_keys=True), file=out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "cstar": cmd_cstar,
    "simulate": cmd_simulate,
    "counterexample": cmd_counterexample,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="wavefront", description="Monotone travelling-wave fronts for delayed RD systems")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat JSON run description")
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    ap.add_argument("--seed", type=int, help="seed for the randomized monotonicity check")
    args = ap.parse_args(argv)
    try:
        if args.config is None:
            if args.command != "counterexample":
                raise ConfigurationError("--config is required")
            cfg = None
        else:
            cfg = RunConfig.load(args.config)
            if args.out is not None:
                cfg.output_dir = args.out
            if args.seed is not None:
                cfg.seed = args.seed
        return COMMANDS[args.command](cfg)
    except (ConfigurationError, ParameterError, InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (MonotonicityError, BudgetError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONV
    except SimulationError as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return EXIT_SIM
    except WavefrontError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
