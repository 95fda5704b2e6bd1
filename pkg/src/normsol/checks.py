"""Property checks run by ``normsol check``: each returns a named pass/fail record."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from .constants import exp_integrability_probe
from .energy import energy, energy_gradient, energy_report, fiber_derivatives, pohozaev
from .fiber import ResolutionWarning, dilate
from .nonlinearity import verify_growth
from .optimizer import geometry_probe
from .radial import (
    RadialFunction,
    RadialGrid,
    grad_norm_sq,
    inner_product,
    laplacian,
    lp_norm_pow,
    make_grid,
    mass,
    random_profile,
)

__all__ = [
    "CheckResult",
    "refine",
    "gaussian_errors",
    "check_quadrature",
    "check_gradient",
    "check_dilation",
    "check_fiber_identity",
    "pohozaev_scale",
    "check_growth",
    "check_geometry",
    "check_exp_integrability",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: str
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<22} {self.value:<12.4g} {self.threshold}  {self.detail}"


def refine(grid: RadialGrid) -> RadialGrid:
    """Nested refinement: every spacing split in two (M -> 2M - 1)."""
    ratio = math.sqrt(grid.ratio) if grid.grading == "geometric" else 1.0
    return make_grid(grid.N, grid.R, 2 * grid.M - 1, grid.grading, ratio)


def _radial_moment(N: int, k: float, c: float) -> float:
    """|S^{N-1}| * int_0^inf r^{N-1+k} exp(-c r^2) dr."""
    omega = 2.0 * math.pi ** (N / 2) / gamma_fn(N / 2)
    return omega * gamma_fn((N + k) / 2) / (2.0 * c ** ((N + k) / 2))


def gaussian_errors(grid: RadialGrid) -> dict:
    """Errors of the discrete operators on u = exp(-r^2) against closed forms."""
    N = grid.N
    u = RadialFunction.from_callable(grid, lambda r: np.exp(-r * r))
    lap_exact = (4.0 * grid.r**2 - 2.0 * N) * np.exp(-grid.r**2)
    inner = grid.r <= 0.5 * grid.R
    return {
        "mass": abs(mass(u) - _radial_moment(N, 0, 2.0)),
        "lp_norm_pow": abs(lp_norm_pow(u, 3.0) - _radial_moment(N, 0, 3.0)),
        "grad_norm_sq": abs(grad_norm_sq(u) - 4.0 * _radial_moment(N, 2, 2.0)),
        "laplacian": float(np.max(np.abs(laplacian(u).values - lap_exact)[inner])),
    }


def check_quadrature(grid: RadialGrid, lo: float = 3.5, hi: float = 4.5) -> CheckResult:
    g2 = grid
    g4 = refine(grid)
    e2, e4 = gaussian_errors(g2), gaussian_errors(g4)
    ratios = {k: (e2[k] / e4[k] if e4[k] > 0 else math.inf) for k in e2}
    ok = all(lo <= r <= hi for r in ratios.values())
    worst = max(ratios.values(), key=lambda r: abs(math.log(r / 4.0)) if 0 < r < math.inf else math.inf)
    detail = " ".join(f"{k}={v:.3f}" for k, v in ratios.items())
    return CheckResult("quadrature-convergence", ok, worst, f"ratio in [{lo}, {hi}]", detail)


def _scaled_profile(grid, rng, model, scale):
    u = random_profile(grid, rng, scale)
    amp = float(np.max(np.abs(u.values)))
    # moderate amplitudes keep both nonlinear terms in play without overflow
    target = 0.4 if model.N == 2 else 1.0
    return u * (target * (0.5 + rng.random()) / amp)


def check_gradient(model, grid: RadialGrid, samples: int, seed: int = 0, tol: float = 1e-5,
                   scale: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _scaled_profile(grid, rng, model, scale)
        v = _scaled_profile(grid, rng, model, scale)
        eps = 1e-4
        fd = (energy(u + v * eps, model) - energy(u - v * eps, model)) / (2 * eps)
        an = inner_product(energy_gradient(u, model), v)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return CheckResult("gradient-consistency", worst <= tol, worst, f"<= {tol:g}", f"{samples} profiles")


def check_dilation(grid: RadialGrid, samples: int, seed: int = 0, tol: float = 1e-4,
                   s_values=(-2.0, -1.0, -0.5, 0.5, 1.0, 2.0), scale: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        for _ in range(samples):
            u = random_profile(grid, rng, scale)
            G = grad_norm_sq(u)
            for s in s_values:
                res = dilate(u, s)
                worst = max(worst, res.massDrift,
                            abs(grad_norm_sq(res.profile) - math.exp(2 * s) * G) / (math.exp(2 * s) * G))
    return CheckResult("dilation-identities", worst <= tol, worst, f"<= {tol:g}", f"|s| <= {max(map(abs, s_values)):g}")


def check_fiber_identity(model, grid: RadialGrid, samples: int, seed: int = 0, tol: float = 1e-5,
                         s_values=(-0.5, -0.25, 0.0, 0.25, 0.5), scale: float = 1.0) -> CheckResult:
    """dJ~/ds (closed form) against Q of the resampled dilation.

    Q is a difference of three terms that can each be much larger than Q, so
    the error is measured relative to the sum of their magnitudes.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        for _ in range(samples):
            u = _scaled_profile(grid, rng, model, scale)
            for s in s_values:
                _, d1 = fiber_derivatives(u, s, model, order=1)
                v = dilate(u, s).profile
                worst = max(worst, abs(d1 - pohozaev(v, model)) / pohozaev_scale(v, model))
    return CheckResult("fiber-pohozaev", worst <= tol, worst, f"<= {tol:g}", f"{samples} x {len(s_values)}")


def pohozaev_scale(u: RadialFunction, model) -> float:
    """|grad u|^2 + N |int F(u)| + N/2 |int f(u) u|."""
    rep = energy_report(u, model)
    N = u.grid.N
    return rep.gradSq + N * abs(rep.intF) + 0.5 * N * abs(rep.intfu)


def check_growth(model, points: int = 100_000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    t = rng.uniform(-3.0, 3.0, points)
    t = t[t != 0.0]
    rep = verify_growth(model, t)
    return CheckResult("growth-conditions", rep.passed, min(rep.ar_margin, rep.lower_margin), ">= 0",
                       f"theta={rep.theta:g}")


def check_geometry(model, a: float, gradsq: float, grid: RadialGrid, samples: int, seed: int = 0,
                   scale: float = 1.0) -> CheckResult:
    K = 1e-2 * gradsq
    if model.N == 2:
        K = min(K, 0.49 * (1 - a * a))
    rep = geometry_probe(model, a, K, samples, grid, seed=seed, scale=scale)
    return CheckResult("mountain-pass-geometry", rep.separated and rep.positive_on_A, rep.inf_B - rep.sup_A,
                       "0 < sup_A < inf_B", f"K={K:.3g} sup_A={rep.sup_A:.3g} inf_B={rep.inf_B:.3g}")


def check_exp_integrability(iterates, a: float) -> CheckResult:
    if not iterates:
        return CheckResult("exp-integrability", False, math.nan, "bounded", "no iterates recorded")
    m = max(grad_norm_sq(u) + mass(u) for u in iterates)
    t = 0.5 * (1.0 + 1.0 / m) if m < 1 else 1.01
    rep = exp_integrability_probe(iterates, t, a)
    ok = rep.hypothesis and rep.tm_below_one and math.isfinite(rep.max_value)
    return CheckResult("exp-integrability", ok, rep.max_value, "finite, t m < 1",
                       f"t={rep.t:.4g} m={rep.m:.4g} sup|grad u|^2={rep.sup_grad_sq:.4g}")
