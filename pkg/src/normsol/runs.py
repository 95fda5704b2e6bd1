"""Orchestration behind the command line: solves, sweeps, checks and constants, with file output."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy
from scipy.interpolate import PchipInterpolator

from . import __version__, kernels
from .checks import (
    CheckResult,
    check_dilation,
    check_exp_integrability,
    check_fiber_identity,
    check_geometry,
    check_gradient,
    check_growth,
    check_quadrature,
)
from .config import RunConfig
from .constants import (
    gn_constant_estimate,
    moser_bound_estimate,
    moser_grid,
    moser_sequence_values,
    sobolev_constant,
    sobolev_grid,
)
from .errors import GeometryError, InvalidArgument, RangeError, RefinementError
from .fiber import ResolutionWarning, transfer
from .nonlinearity import ALPHA0
from .optimizer import SolutionReport, gaussian_seed, project_sphere, solve
from .radial import RadialFunction, RadialGrid, lp_norm_pow

__all__ = [
    "run_solve",
    "run_sweep",
    "run_checks",
    "run_constants",
    "lambda_relation",
    "fit_slope",
    "write_json",
    "write_profile_csv",
    "read_profile_csv",
]

SOLVER_ERRORS = (GeometryError, RangeError, RefinementError, InvalidArgument)


# ---------------------------------------------------------------- file output

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: str, obj) -> None:
    # float repr is the shortest string that round-trips (at most 17 significant digits)
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _g17(x) -> str:
    return format(float(x), ".17g")


def write_profile_csv(path: str, u: RadialFunction) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u"])
        for r, v in zip(u.grid.r, u.values):
            w.writerow([_g17(r), _g17(v)])


def read_profile_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "u"]:
        raise InvalidArgument(f"{path}: expected a header 'r,u'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return data[:, 0], data[:, 1]


def _versions() -> dict:
    return {"normsol": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "kernels": kernels.BACKEND}


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------- solving

def lambda_relation(rep: SolutionReport, model, a: float) -> dict:
    """The multiplier predicted from the Pohozaev identity and the mass constraint.

    N >= 3: lambda a^2 = -mu (N/q - (N-2)/2) |u|_q^q.   N = 2: lambda a^2 = -2 int F(u).
    """
    u = rep.profile
    N = u.grid.N
    if N == 2:
        pred = -2.0 * rep.energy.intF / (a * a)
    else:
        pred = -(model.mu / (a * a)) * (N / model.q - 0.5 * (N - 2)) * lp_norm_pow(u, model.q)
    rel = abs(rep.lam - pred) / abs(pred) if pred != 0 else math.inf
    return {"predicted": pred, "relativeError": rel}


def _make_seed(cfg: RunConfig, grid: RadialGrid, mu: float | None = None) -> RadialFunction:
    if cfg.seed_kind == "custom":
        r, v = read_profile_csv(cfg.seed_path)
        vals = np.zeros(grid.M)
        inside = grid.r <= r[-1]
        vals[inside] = PchipInterpolator(r, v)(grid.r[inside])
        return project_sphere(RadialFunction(grid, vals), cfg.a)
    return gaussian_seed(grid, cfg.a, cfg.seed_width * cfg.length_scale(mu))


def _solve_one(cfg: RunConfig, mu: float, seed: RadialFunction | None = None,
               record_iterates: bool = False) -> tuple[SolutionReport | None, str, RadialGrid]:
    grid = cfg.grid(mu)
    model = cfg.model(mu)
    scfg = cfg.solve_config()
    scfg.record_iterates = record_iterates
    if seed is None:
        seed = _make_seed(cfg, grid, mu)
    elif not seed.grid.same_as(grid):
        # the previous solution, dilated along with the rescaled grid
        seed = project_sphere(transfer(seed, grid, math.log(seed.grid.R / grid.R)), cfg.a)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResolutionWarning)
            rep = solve(seed, model, scfg)
        return rep, rep.message, grid
    except SOLVER_ERRORS as exc:
        return None, f"{type(exc).__name__}: {exc}", grid


def _success(rep: SolutionReport | None) -> bool:
    return rep is not None and rep.converged and rep.lam < 0


def run_solve(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    out = _ensure_dir(cfg.out_dir())
    t0 = time.perf_counter()
    rep, message, grid = _solve_one(cfg, cfg.mu)
    wall = time.perf_counter() - t0
    model = cfg.model()
    doc = {"mode": "solve", "config": cfg.echo(), "versions": _versions(), "wallTime": wall,
           "grid": grid.meta(), "converged": bool(rep is not None and rep.converged), "message": message}
    if rep is not None:
        doc.update(rep.summary())
        doc["converged"] = rep.converged
        doc["lambdaRelation"] = lambda_relation(rep, model, cfg.a)
        write_profile_csv(os.path.join(out, "profile.csv"), rep.profile)
    write_json(os.path.join(out, "report.json"), doc)
    status = 0 if rep is not None and rep.converged else 1
    if rep is not None:
        print(f"{'converged' if status == 0 else 'NOT converged'}: lambda = {rep.lam:.10g}, "
              f"gamma = {rep.gamma:.10g}, Q = {rep.energy.Q:.3e}, residual = {rep.energy.residualL2:.3e} "
              f"({message})", file=stream)
    else:
        print(f"NOT converged: {message}", file=stream)
    return status


# ---------------------------------------------------------------- sweeps

def fit_slope(mus, gammas) -> float:
    """Least-squares slope of log gamma against log mu."""
    x, y = np.log(np.asarray(mus, float)), np.log(np.asarray(gammas, float))
    return float(np.polyfit(x, y, 1)[0])


def _record(mu, rep, message, grid, seeded_from, cfg, model):
    rec = {"mu": mu, "R": grid.R, "seededFrom": seeded_from, "message": message}
    if rep is None:
        rec.update(gamma=math.nan, **{"lambda": math.nan}, gradsq=math.nan, massCheck=math.nan,
                   converged=False, lambdaRelError=math.nan, intF=math.nan, intFOverGamma=math.nan)
        return rec
    rec.update(gamma=rep.gamma, **{"lambda": rep.lam}, gradsq=rep.energy.gradSq,
               massCheck=abs(rep.energy.mass - cfg.a ** 2), converged=bool(rep.converged),
               lambdaRelError=lambda_relation(rep, model, cfg.a)["relativeError"],
               intF=rep.energy.intF, intFOverGamma=rep.energy.intF / rep.gamma)
    return rec


def _sweep_worker(args):
    cfg, mu = args
    rep, message, grid = _solve_one(cfg, mu)
    return mu, rep, message, grid


def _mu_star(cfg: RunConfig, records, profiles) -> dict:
    """Smallest succeeding mu of the sweep, refined to a bracketing interval by bisection."""
    ok = [i for i, r in enumerate(records) if r["converged"] and r["lambda"] < 0]
    if not ok:
        return {"muStar": None, "muStarInterval": None, "bisectionRecords": []}
    k = ok[0]
    hi = records[k]["mu"]
    seed = profiles[k]
    extra = []
    lo = None
    if k > 0:
        lo = records[k - 1]["mu"]
    elif cfg.bisect:
        # expand the bracket downwards until the predicate fails
        trial = hi
        for _ in range(6):
            trial /= 4.0
            rep, msg, grid = _solve_one(cfg, trial, seed)
            extra.append(_record(trial, rep, msg, grid, hi, cfg, cfg.model(trial)))
            if _success(rep):
                hi, seed = trial, rep.profile
            else:
                lo = trial
                break
    if cfg.bisect and lo is not None:
        for _ in range(cfg.bisect_steps):
            mid = math.sqrt(lo * hi)
            rep, msg, grid = _solve_one(cfg, mid, seed)
            extra.append(_record(mid, rep, msg, grid, hi, cfg, cfg.model(mid)))
            if _success(rep):
                hi, seed = mid, rep.profile
            else:
                lo = mid
    return {"muStar": hi, "muStarInterval": [lo, hi], "bisectionRecords": extra}


def run_sweep(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    out = _ensure_dir(cfg.out_dir())
    t0 = time.perf_counter()
    mus = np.geomspace(cfg.mu_min, cfg.mu_max, cfg.mu_points)
    records, profiles = [], []
    if cfg.continuation or cfg.workers == 1:
        prev, prev_mu = None, None
        for mu in mus:
            rep, message, grid = _solve_one(cfg, float(mu), prev if cfg.continuation else None)
            seeded = prev_mu if (cfg.continuation and prev is not None) else "gaussian"
            records.append(_record(float(mu), rep, message, grid, seeded, cfg, cfg.model(float(mu))))
            profiles.append(rep.profile if rep is not None else None)
            if rep is not None and rep.converged:
                prev, prev_mu = rep.profile, float(mu)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for mu, rep, message, grid in pool.map(_sweep_worker, [(cfg, float(m)) for m in mus]):
                records.append(_record(mu, rep, message, grid, "gaussian", cfg, cfg.model(mu)))
                profiles.append(rep.profile if rep is not None else None)

    conv = [r for r in records if r["converged"]]
    mid = math.sqrt(cfg.mu_min * cfg.mu_max)
    upper = [r for r in conv if r["mu"] >= mid * (1 - 1e-12)]
    slope = None
    if len(conv) >= 5 and len(upper) >= 2:
        slope = fit_slope([r["mu"] for r in upper], [r["gamma"] for r in upper])
    expo = cfg.theoretical_exponent()
    star = _mu_star(cfg, records, profiles)
    summary = {
        "mode": "sweep",
        "config": cfg.echo(),
        "versions": _versions(),
        "wallTime": time.perf_counter() - t0,
        "theoreticalExponent": expo,
        "fittedSlope": slope,
        "fitRange": [mid, cfg.mu_max],
        "slopeAvailable": slope is not None,
        "slopeBound": slope is not None and slope <= -expo + 0.15,
        "slopeWithinTolerance": slope is not None and abs(slope + expo) <= 0.15,
        "records": records,
        **star,
    }
    if cfg.N >= 3:
        rel = [r["lambdaRelError"] for r in conv]
        summary["maxLambdaRelError"] = max(rel) if rel else None
        # gamma must sit below S^{N/2}/N for compactness; S comes from the truncated-ball estimate
        level = sobolev_constant(cfg.N, sobolev_grid(cfg.N)).value ** (0.5 * cfg.N) / cfg.N
        summary["compactnessLevel"] = level
        ratios = [r["intFOverGamma"] for r in upper]
        summary["intFOverGammaRange"] = [min(ratios), max(ratios)] if ratios else None
        for r in records:
            r["belowCompactnessLevel"] = bool(r["converged"] and r["gamma"] < level)
    else:
        theta = cfg.p
        summary["energyBoundHolds"] = all(2 * r["gamma"] >= (theta - 4) * r["intF"] for r in conv)

    with open(os.path.join(out, "sweep.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu", "gamma", "lambda", "gradsq", "converged"])
        for r in records:
            w.writerow([_g17(r["mu"]), _g17(r["gamma"]), _g17(r["lambda"]), _g17(r["gradsq"]),
                        "true" if r["converged"] else "false"])
    write_json(os.path.join(out, "summary.json"), summary)

    for r in records:
        print(f"mu = {r['mu']:<12.6g} gamma = {r['gamma']:<14.8g} lambda = {r['lambda']:<14.8g} "
              f"{'ok' if r['converged'] else 'FAILED: ' + r['message']}", file=stream)
    if slope is None:
        print("fitted slope unavailable (fewer than 5 converged records)", file=stream)
        return 1
    print(f"fitted slope {slope:.4f} (theory {-expo:.4f}); mu* interval {star['muStarInterval']}", file=stream)
    return 0 if summary["slopeWithinTolerance"] else 1


# ---------------------------------------------------------------- checks

def _guarded(name, fn) -> CheckResult:
    try:
        return fn()
    except Exception as exc:  # a crashing property is a failing property
        return CheckResult(name, False, math.nan, "-", f"{type(exc).__name__}: {exc}")


def run_checks(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    grid = cfg.grid()
    model = cfg.model()
    n = cfg.samples
    results = [
        _guarded("quadrature-convergence", lambda: check_quadrature(grid)),
        _guarded("gradient-consistency", lambda: check_gradient(model, grid, n, cfg.seed)),
        _guarded("dilation-identities", lambda: check_dilation(grid, max(1, n // 5), cfg.seed,
                                                               scale=cfg.R / 60.0)),
        _guarded("fiber-pohozaev", lambda: check_fiber_identity(model, grid, max(1, n // 5), cfg.seed)),
        _guarded("growth-conditions", lambda: check_growth(model, seed=cfg.seed)),
    ]
    rep, message, _ = _solve_one(cfg, cfg.mu, record_iterates=(cfg.N == 2))
    ok = _success(rep)
    results.append(CheckResult("solve", ok, rep.energy.Q if rep else math.nan, "converged, lambda < 0", message))
    if rep is not None:
        results.append(_guarded("mountain-pass-geometry",
                                lambda: check_geometry(model, cfg.a, rep.energy.gradSq, grid, n, cfg.seed)))
        if cfg.N == 2:
            results.append(_guarded("exp-integrability", lambda: check_exp_integrability(rep.iterates, cfg.a)))
    for r in results:
        print(r.line(), file=stream)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=stream)
        return 1
    print("all checks passed", file=stream)
    return 0


# ---------------------------------------------------------------- constants

def run_constants(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    out = _ensure_dir(cfg.out_dir())
    reports = []
    grid = cfg.grid()
    if cfg.N >= 3:
        s = sobolev_constant(cfg.N, sobolev_grid(cfg.N))
        s.parameters["compactnessLevel"] = s.value ** (cfg.N / 2) / cfg.N
        reports.append(s)
        reports.append(gn_constant_estimate(grid, cfg.q, 200, cfg.seed))
    else:
        reports.append(gn_constant_estimate(grid, cfg.p, 200, cfg.seed))
        reports.append(moser_bound_estimate(grid, 0.9 * ALPHA0, 100, cfg.seed))
        ns = [10.0 ** k for k in range(1, 7)]
        reports.extend(moser_sequence_values(moser_grid(ns[-1]), 1.1 * ALPHA0, ns))
    write_json(os.path.join(out, "constants.json"),
               {"mode": "constants", "config": cfg.echo(), "versions": _versions(),
                "reports": [r.to_dict() for r in reports]})
    for r in reports:
        extra = ", ".join(f"{k}={v:.6g}" for k, v in r.parameters.items())
        print(f"{r.name:<20} {r.value:.10g}  ({extra})", file=stream)
    return 0
