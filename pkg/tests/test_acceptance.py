"""Acceptance suite: the twelve numbered criteria, one test each.

Every test records a PASS/FAIL line with the measured quantities; the lines
are printed as the test runs (visible with ``-s``) and collected in an
"acceptance criteria" section of the terminal summary.

    pytest tests/test_acceptance.py -v
"""

import io
import json
import math
import time

import numpy as np
import pytest

from normsol import CombinedPower, ExpCritical, geometric_ratio, make_grid, solve
from normsol.checks import (
    check_dilation,
    check_fiber_identity,
    check_geometry,
    check_gradient,
    check_growth,
    check_quadrature,
    gaussian_errors,
    refine,
)
from normsol.config import load_config
from normsol.constants import (
    moser_bound_estimate,
    moser_grid,
    moser_sequence_values,
    rayleigh_quotient,
    sobolev_constant,
    sobolev_grid,
)
from normsol.nonlinearity import ALPHA0
from normsol.optimizer import gaussian_seed
from normsol.radial import lp_norm_pow, random_profile
from normsol.runs import run_sweep

N2_A = 0.5
N2_SWEEP = {"N": "2", "a": str(N2_A), "p": "6", "mu_min": "1e3", "mu_max": "1e5"}


def rel(x, y):
    return abs(x - y) / abs(y)


def graded_grid(N, M=4000):
    """R = 60 with first spacing 1e-3: resolves the origin for resampled dilations."""
    return make_grid(N, 60.0, M, "geometric", geometric_ratio(60.0, M, 1e-3))


# ---------------------------------------------------------------- shared runs

@pytest.fixture(scope="module")
def solution3():
    cfg = load_config("solve")
    t0 = time.perf_counter()
    grid = cfg.grid()
    model = cfg.model()
    rep = solve(gaussian_seed(grid, cfg.a, cfg.seed_width), model, cfg.solve_config())
    return rep, model, cfg, time.perf_counter() - t0


def _sweep(tmp_path_factory, name, overrides):
    out = tmp_path_factory.mktemp(name)
    cfg = load_config("sweep", None, dict(overrides, out=str(out)))
    code = run_sweep(cfg, io.StringIO())
    summary = json.loads((out / "summary.json").read_text())
    return code, summary, cfg


@pytest.fixture(scope="module")
def sweep3(tmp_path_factory):
    return _sweep(tmp_path_factory, "sweep3", {})


@pytest.fixture(scope="module")
def sweep2(tmp_path_factory):
    return _sweep(tmp_path_factory, "sweep2", N2_SWEEP)


@pytest.fixture(scope="module")
def solution2(sweep2):
    _, summary, _ = sweep2
    mu_star = summary["muStar"]
    mu = 100.0
    cfg = load_config("solve", None, {"N": "2", "a": str(N2_A), "p": "6", "mu": str(mu)})
    scfg = cfg.solve_config()
    scfg.record_iterates = True
    rep = solve(gaussian_seed(cfg.grid(), cfg.a, cfg.seed_width), cfg.model(), scfg)
    return rep, cfg.model(), cfg, mu_star


# ---------------------------------------------------------------- criteria

def test_criterion_01_operator_convergence(acceptance):
    parts, ok = [], True
    for N in (2, 3):
        for grid in (make_grid(N, 10.0, 1000), make_grid(N, 20.0, 1500, "geometric", 1.002)):
            res = check_quadrature(grid, 3.5, 4.5)
            e2, e4 = gaussian_errors(grid), gaussian_errors(refine(grid))
            ratios = [e2[k] / e4[k] for k in e2]
            ok &= res.passed and all(3.5 <= r <= 4.5 for r in ratios)
            parts.append(f"N={N} {grid.grading}: " + "/".join(f"{r:.3f}" for r in ratios))
    acceptance(1, ok, "error ratios (mass/lp/grad/lap) " + "; ".join(parts))
    assert ok


def test_criterion_02_gradient_consistency(acceptance):
    r3 = check_gradient(CombinedPower(50.0, 4.0, 3), make_grid(3, 20.0, 4000), 100, seed=0, tol=1e-5)
    r2 = check_gradient(ExpCritical(100.0, 6.0), make_grid(2, 20.0, 4000), 100, seed=0, tol=1e-5)
    ok = r3.passed and r2.passed
    acceptance(2, ok, f"worst relative FD error: power {r3.value:.2e}, exponential {r2.value:.2e} (<= 1e-5)")
    assert ok


def test_criterion_03_dilation_identities(acceptance):
    parts, ok = [], True
    for N in (3, 2):
        grid = graded_grid(N)
        coarse = check_dilation(grid, 20, seed=0, tol=1e-4)
        fine = check_dilation(refine(grid), 20, seed=0, tol=1e-4)
        order = math.log2(coarse.value / fine.value)
        ok &= coarse.passed and order >= 1.5
        parts.append(f"N={N}: {coarse.value:.2e} at M=4000, {fine.value:.2e} refined (order {order:.2f})")
    acceptance(3, ok, "; ".join(parts) + " [<= 1e-4, |s| <= 2]")
    assert ok


def test_criterion_04_fiber_pohozaev_identity(acceptance):
    s_values = (-0.5, -0.25, 0.0, 0.25, 0.5)
    r3 = check_fiber_identity(CombinedPower(50.0, 4.0, 3), graded_grid(3), 20, seed=0,
                              tol=1e-5, s_values=s_values)
    r2 = check_fiber_identity(ExpCritical(100.0, 6.0), graded_grid(2), 20, seed=0,
                              tol=1e-5, s_values=s_values)
    ok = r3.passed and r2.passed
    acceptance(4, ok, f"20 profiles x 5 s: power {r3.value:.2e}, exponential {r2.value:.2e} (<= 1e-5)")
    assert ok


def test_criterion_05_solve_three_dimensions(acceptance, solution3):
    rep, model, cfg, wall = solution3
    e = rep.energy
    N, a = 3, cfg.a
    predicted = -(model.mu / a**2) * (N / model.q - (N - 2) / 2) * lp_norm_pow(rep.profile, model.q)
    lam_err = rel(rep.lam, predicted)
    h1 = math.sqrt(e.gradSq + e.mass)
    mass_ulps = abs(e.mass - a * a) / math.ulp(a * a)
    checks = {
        "converged": rep.converged,
        "Q": abs(e.Q) <= 1e-6 * e.gradSq,
        "residual": e.residualL2 <= 1e-5 * h1,
        "mass": mass_ulps <= 2,
        "lambda<0": rep.lam < 0,
        "lambda relation": lam_err <= 1e-4,
        "runtime": wall <= 60.0,
    }
    ok = all(checks.values())
    acceptance(5, ok, f"lambda={rep.lam:.8f} |Q|/gradSq={abs(e.Q) / e.gradSq:.1e} residual/H1={e.residualL2 / h1:.1e} "
                      f"mass off by {mass_ulps:.0f} ulp, lambda-relation {lam_err:.1e}, {wall:.2f} s"
                      + ("" if ok else f" failed: {[k for k, v in checks.items() if not v]}"))
    assert ok


def test_criterion_06_solve_plane(acceptance, solution2):
    rep, model, cfg, mu_star = solution2
    a = cfg.a
    pred = -2.0 * rep.energy.intF / a**2
    lam_err = rel(rep.lam, pred)
    bound = 1.0 - a * a
    worst = max([d.gradSq for d in rep.diagnostics] + [rep.energy.gradSq])
    checks = {
        "mu above mu*": mu_star is not None and model.mu > mu_star,
        "converged": rep.converged,
        "lambda<0": rep.lam < 0,
        "lambda relation": lam_err <= 1e-4,
        "Moser threshold": worst < bound and len(rep.diagnostics) == len(rep.iterates) > 0,
    }
    ok = all(checks.values())
    acceptance(6, ok, f"mu={model.mu:g} (detected mu* <= {mu_star:.4g}), lambda={rep.lam:.8f}, lambda-relation {lam_err:.1e}, "
                      f"max gradSq over {len(rep.diagnostics)} iterates {worst:.4f} < {bound}"
                      + ("" if ok else f" failed: {[k for k, v in checks.items() if not v]}"))
    assert ok


def test_criterion_07_scaling_three_dimensions(acceptance, sweep3):
    code, s, _ = sweep3
    slope = s["fittedSlope"]
    ok = code == 0 and slope is not None and abs(slope + 2.0) <= 0.15 and s["maxLambdaRelError"] <= 1e-4
    acceptance(7, ok, f"mu in [1e2, 1e4]: slope {slope:.4f} (target -2 +- 0.15), "
                      f"max lambda-relation error {s['maxLambdaRelError']:.1e}, mu* in {s['muStarInterval']}")
    assert ok


def test_criterion_08_scaling_plane(acceptance, sweep2):
    code, s, cfg = sweep2
    slope = s["fittedSlope"]
    theta = cfg.p
    conv = [r for r in s["records"] if r["converged"]]
    margin = min(2 * r["gamma"] - (theta - 4) * r["intF"] for r in conv)
    ok = (code == 0 and slope is not None and abs(slope + 1.0) <= 0.15 and s["energyBoundHolds"]
          and margin >= 0 and len(conv) >= 5)
    acceptance(8, ok, f"mu in [1e3, 1e5]: slope {slope:.4f} (target -1 +- 0.15); "
                      f"min 2 gamma - (p-4) int F = {margin:.3e} over {len(conv)} solutions")
    assert ok


def test_criterion_09_mountain_pass_geometry(acceptance, solution3, solution2):
    rep3, model3, cfg3, _ = solution3
    rep2, model2, cfg2, _ = solution2
    g3 = check_geometry(model3, cfg3.a, rep3.energy.gradSq, rep3.profile.grid, 200, seed=0)
    g2 = check_geometry(model2, cfg2.a, rep2.energy.gradSq, rep2.profile.grid, 200, seed=0)
    k2 = 1e-2 * rep2.energy.gradSq
    ok = g3.passed and g2.passed and k2 < 0.5 * (1 - cfg2.a**2)
    acceptance(9, ok, f"200 samples: N=3 {g3.detail}; N=2 {g2.detail}")
    assert ok


def test_criterion_10_trudinger_moser(acceptance):
    alpha = 0.9 * ALPHA0
    grid = make_grid(2, 40.0, 4000)
    b1 = moser_bound_estimate(grid, alpha, samples=100, seed=0, mass_bound=0.9).value
    b2 = moser_bound_estimate(refine(grid), alpha, samples=100, seed=0, mass_bound=0.9).value
    ns = [10.0**k for k in range(1, 7)]
    seq = [r.value for r in moser_sequence_values(moser_grid(ns[-1]), 1.1 * ALPHA0, ns)]
    increasing = all(b > a for a, b in zip(seq, seq[1:]))
    ok = math.isfinite(b1) and rel(b1, b2) <= 1e-2 and increasing and len(seq) >= 5
    acceptance(10, ok, f"sup at 0.9*4pi: {b1:.5f} -> {b2:.5f} refined (rel {rel(b1, b2):.1e}); "
                       f"sequence at 1.1*4pi: " + ", ".join(f"{v:.2f}" for v in seq))
    assert ok


def test_criterion_11_growth_conditions(acceptance):
    r3 = check_growth(CombinedPower(50.0, 4.0, 3), points=100_000, seed=0)
    r2 = check_growth(ExpCritical(100.0, 6.0), points=100_000, seed=0)
    ok = r3.passed and r2.passed and r3.value >= 0 and r2.value >= 0
    acceptance(11, ok, f"1e5 points in [-3, 3]: min margin power {r3.value:.2e} (theta=q), "
                       f"exponential {r2.value:.2e} (theta=p)")
    assert ok


def test_criterion_12_sobolev_stability(acceptance):
    base = sobolev_constant(3, sobolev_grid(3, 200.0, 4000)).value
    finer = sobolev_constant(3, sobolev_grid(3, 200.0, 8000)).value
    wider = sobolev_constant(3, sobolev_grid(3, 400.0, 4000)).value
    rng = np.random.default_rng(0)
    grids = [make_grid(3, 20.0, 2000), sobolev_grid(3, 200.0, 4000)]
    quotients = [rayleigh_quotient(random_profile(g, rng, scale)) for g in grids
                 for scale in (0.05, 1.0, 5.0) for _ in range(35)]
    ok = rel(finer, base) <= 1e-3 and rel(wider, base) <= 1e-3 and min(quotients) >= base - 1e-3
    acceptance(12, ok, f"S = {base:.6f}; M->2M rel {rel(finer, base):.1e}, R->2R rel {rel(wider, base):.1e}; "
                       f"min of {len(quotients)} random quotients {min(quotients):.4f}")
    assert ok
