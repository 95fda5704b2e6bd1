"""Normalized critical points by minimax descent over the dilation fibers plus Newton refinement.

The mountain-pass level is computed through the reduced functional

    sigma(u) = max_s J(H(u, s)),   u on S(a),

which is minimized by a preconditioned projected-gradient descent. The
iterate is kept in undilated coordinates so that sigma is always evaluated
by the closed fiber formula; the profile is resampled only when the fiber
maximizer drifts far from zero and once at the end. The result is polished
by Newton's method on the full system (-lap u - f(u) - lam u, |u|^2 - a^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .energy import EnergyReport, energy_report, fiber_derivatives, h1_norm, lambda_multiplier
from .errors import GeometryError, InvalidArgument, RangeError, RefinementError
from .fiber import ResolutionWarning, dilate, max_over_dilations
from .nonlinearity import NonlinearityModel
from .radial import (
    RadialFunction,
    RadialGrid,
    grad_norm_sq,
    laplacian,
    mass,
    random_profile,
    stiffness_apply,
    stiffness_bands,
)

__all__ = [
    "SolveConfig",
    "IterRecord",
    "SolutionReport",
    "GeometryReport",
    "project_sphere",
    "gaussian_seed",
    "minimax_solve",
    "newton_refine",
    "solve",
    "geometry_probe",
]


@dataclass
class SolveConfig:
    a: float = 1.0
    max_outer_iters: int = 400
    step_init: float = 1.0
    tol_q: float | None = None        # default 1e-6 * max(1, |grad u|^2)
    tol_r: float | None = None        # default 1e-5 * ||u||_H1
    tol_step: float = 1e-6
    s_max: float = 4.0
    bracket: tuple = (-3.0, 3.0)
    seed_kind: str = "gaussian"
    seed_width: float = 1.0
    seed_path: str | None = None
    newton_max_iters: int = 30
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    reanchor: float = 0.5
    record_iterates: bool = False     # keep H(u, s*) of every accepted iterate

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise InvalidArgument(f"a must be positive, got {self.a!r}")
        for name in ("tol_q", "tol_r"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidArgument(f"{name} must be positive")
        if not self.tol_step > 0 or not self.step_init > 0:
            raise InvalidArgument("tol_step and step_init must be positive")
        if not (0 < self.armijo_c1 < 1 and 0 < self.backtrack < 1):
            raise InvalidArgument("armijo_c1 and backtrack must lie in (0, 1)")
        self.bracket = tuple(float(b) for b in self.bracket)

    def tol_q_for(self, gsq: float) -> float:
        return self.tol_q if self.tol_q is not None else 1e-6 * max(1.0, gsq)

    def tol_r_for(self, u: RadialFunction) -> float:
        return self.tol_r if self.tol_r is not None else 1e-5 * h1_norm(u)


@dataclass
class IterRecord:
    it: int
    sigma: float           # max_s J(H(u, s)) after the step
    sigma_before: float
    absQ: float            # |dJ~/ds| at the fiber maximum
    residual: float        # L2 norm of the tangential gradient (= PDE residual of H(u, s*))
    step: float            # L2 size of the accepted update
    s_star: float
    gradSq: float          # |grad H(u, s*)|^2
    reanchored: bool = False


@dataclass
class SolutionReport:
    profile: RadialFunction
    lam: float
    energy: EnergyReport
    gamma: float
    iterations: int
    converged: bool
    diagnostics: list = field(default_factory=list)
    minimax_converged: bool = False
    newton_iterations: int = 0
    newton_converged: bool = False
    newton_residuals: list = field(default_factory=list)
    message: str = ""
    tol_q: float = 0.0
    tol_r: float = 0.0
    iterates: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = {
            "lambda": self.lam,
            "gamma": self.gamma,
            "iterations": self.iterations,
            "converged": self.converged,
            "minimax_converged": self.minimax_converged,
            "newton_iterations": self.newton_iterations,
            "newton_converged": self.newton_converged,
            "newton_residuals": list(self.newton_residuals),
            "message": self.message,
            "tol_q": self.tol_q,
            "tol_r": self.tol_r,
            "energy": self.energy.to_dict(),
            "diagnostics": [asdict(r) for r in self.diagnostics],
        }
        return d


def project_sphere(u: RadialFunction, a: float) -> RadialFunction:
    """Rescale u onto S(a) = {mass = a^2}.

    After the analytic rescale, the scale factor is nudged by single ulps so
    that the computed mass hits a^2 exactly whenever some factor does.
    """
    m = mass(u)
    if not m > 0:
        raise InvalidArgument("cannot project a zero profile onto the sphere")
    target = a * a
    c0 = a / math.sqrt(m)
    best_c, best_err = c0, math.inf
    # candidates c0 + k ulp, nearest first
    for k in sorted(range(-16, 17), key=abs):
        c = c0 + k * math.ulp(c0)
        err = abs(mass(u * c) - target)
        if err < best_err:
            best_c, best_err = c, err
            if err == 0.0:
                break
    return u * best_c


def gaussian_seed(grid: RadialGrid, a: float, width: float = 1.0) -> RadialFunction:
    return project_sphere(RadialFunction.from_callable(grid, lambda r: np.exp(-0.5 * (r / width) ** 2)), a)


def _banded_solve(grid: RadialGrid, scale: float, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (scale K + shift W) x = W rhs on the free nodes; x = 0 at R."""
    diag, off = stiffness_bands(grid)
    W = grid.weights[:-1]
    ab = np.zeros((3, grid.M - 1))
    ab[0, 1:] = scale * off
    ab[1] = scale * diag + shift * W
    ab[2, :-1] = scale * off
    x = np.zeros(grid.M)
    x[:-1] = solve_banded((1, 1), ab, W * rhs[:-1])
    return x


def _fiber_gradient(u: RadialFunction, s: float, model) -> np.ndarray:
    """Weighted gradient of u -> J~(u, s)."""
    N = u.grid.N
    c = math.exp(0.5 * N * s)
    g = math.exp(2.0 * s) * (-laplacian(u).values) - model.f(c * u.values) / c
    g[-1] = 0.0
    return g


def _dilation_generator(grid: RadialGrid, uvals: np.ndarray) -> np.ndarray:
    """d/ds H(u, s) at s = 0, i.e. (N/2) u + r u'."""
    xi = 0.5 * grid.N * uvals + grid.r * np.gradient(uvals, grid.r)
    xi[-1] = 0.0
    return xi


def _project_direction(grid, uvals, d, g, scale, shift):
    """Make the preconditioned direction d = P^{-1} W g tangent to S(a) and
    P-orthogonal to the dilation orbit through u.

    sigma is constant along exact dilation orbits, so on the grid that
    direction is nearly flat and only slows the descent down.
    """
    w = grid.weights
    z = _banded_solve(grid, scale, shift, uvals)       # P z = W u
    xi = _dilation_generator(grid, uvals)
    Pxi = scale * stiffness_apply(grid, xi) + shift * w * xi
    Pxi[-1] = 0.0
    Wu = w * uvals
    cross = float(np.dot(xi, Wu))                       # <z, P xi> = <u, W xi>
    gram = np.array([[np.dot(z, Wu), cross], [cross, np.dot(xi, Pxi)]])
    rhs = np.array([np.dot(d, Wu), np.dot(xi, w * g)])  # <v, P d> with P d = W g
    try:
        c = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return d - (np.dot(w, d * uvals) / np.dot(w, z * uvals)) * z
    return d - c[0] * z - c[1] * xi


def _moser_ok(model, a, gsq_dilated):
    return model.N != 2 or gsq_dilated < 1.0 - a * a


def minimax_solve(seed: RadialFunction, model: NonlinearityModel, cfg: SolveConfig) -> SolutionReport:
    """Minimize sigma(u) = max_s J(H(u, s)) over S(a) from ``seed``."""
    grid = seed.grid
    a = cfg.a
    N = grid.N
    if grid.N != model.N:
        raise InvalidArgument(f"grid dimension {grid.N} does not match model dimension {model.N}")

    u = project_sphere(seed, a)
    try:
        s, sig = max_over_dilations(u, model, cfg.bracket)
        u = dilate(u, s, cfg.s_max).profile
        s, sig = max_over_dilations(u, model, cfg.bracket, s_guess=0.0)
    except GeometryError as exc:
        raise GeometryError(f"seed is outside the mountain-pass regime: {exc}") from exc

    diagnostics: list[IterRecord] = []
    iterates: list[RadialFunction] = []
    converged = False
    message = "max_outer_iters reached"
    w = grid.weights
    floor = (math.pi / grid.R) ** 2

    for it in range(1, cfg.max_outer_iters + 1):
        gsq = grad_norm_sq(u)
        grad = _fiber_gradient(u, s, model)
        lam = float(np.dot(w, grad * u.values)) / (a * a)
        g = grad - lam * u.values
        e2 = math.exp(2.0 * s)
        shift = max(abs(lam), e2 * floor)
        d = _banded_solve(grid, e2, shift, g)
        d = _project_direction(grid, u.values, d, g, e2, shift)
        slope = float(np.dot(w, g * d))
        if not slope > 0:
            message = "preconditioned direction is not a descent direction"
            break

        tau = cfg.step_init
        accepted = None
        while tau >= 1e-14:
            try:
                trial = project_sphere(RadialFunction(grid, u.values - tau * d), a)
                s_t, sig_t = max_over_dilations(trial, model, cfg.bracket, s_guess=s)
                ok = _moser_ok(model, a, math.exp(2.0 * s_t) * grad_norm_sq(trial))
            except (GeometryError, RangeError, InvalidArgument):
                ok = False
            if ok and sig_t <= sig - cfg.armijo_c1 * tau * slope:
                accepted = (trial, s_t, sig_t)
                break
            tau *= cfg.backtrack
        if accepted is None:
            message = ("Moser-threshold: every trial step crossed |grad u|^2 = 1 - a^2"
                       if model.N == 2 else "line search stalled")
            break

        step = tau * math.sqrt(float(np.dot(w, d * d)))
        trial, s_t, sig_t = accepted
        _, dQ = fiber_derivatives(trial, s_t, model, order=1)
        u, sig_prev, s, sig = trial, sig, s_t, sig_t
        rec = IterRecord(it, sig, sig_prev, abs(dQ), math.sqrt(float(np.dot(w, g * g))), step, s,
                         math.exp(2.0 * s) * grad_norm_sq(u))
        if abs(s) > cfg.reanchor:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionWarning)
                u = dilate(u, s, cfg.s_max).profile
            s, sig = max_over_dilations(u, model, cfg.bracket, s_guess=0.0)
            rec.reanchored = True
        diagnostics.append(rec)
        if cfg.record_iterates:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionWarning)
                iterates.append(dilate(u, s, cfg.s_max).profile if s != 0.0 else u)
        if step <= cfg.tol_step * a:
            converged = True
            message = "step below tol_step"
            break

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        v = dilate(u, s, cfg.s_max).profile if s != 0.0 else u
    v = project_sphere(v, a)
    rep = energy_report(v, model)
    tol_q = cfg.tol_q_for(rep.gradSq)
    tol_r = cfg.tol_r_for(v)
    return SolutionReport(
        profile=v,
        lam=rep.lam,
        energy=rep,
        gamma=rep.J,
        iterations=len(diagnostics),
        converged=converged and abs(rep.Q) <= tol_q and rep.residualL2 <= tol_r,
        diagnostics=diagnostics,
        minimax_converged=converged,
        message=message,
        tol_q=tol_q,
        tol_r=tol_r,
        iterates=iterates,
    )


def _system(grid, model, uvals, lam, a):
    W = grid.weights[:-1]
    uu = uvals[:-1]
    F1 = stiffness_apply(grid, uvals)[:-1] - W * model.f(uu) - lam * W * uu
    F2 = 0.5 * (float(np.dot(W, uu * uu)) - a * a)
    res = math.sqrt(float(np.dot(F1 * F1, 1.0 / W)))
    return F1, F2, res


def newton_refine(u: RadialFunction, model: NonlinearityModel, cfg: SolveConfig,
                  lam0: float | None = None) -> SolutionReport:
    """Damped Newton on (-lap u - f(u) - lam u = 0, mass(u) = a^2) in (u, lam)."""
    grid = u.grid
    a = cfg.a
    W = grid.weights[:-1]
    diag, off = stiffness_bands(grid)
    K = sp.diags([off, diag, off], [-1, 0, 1], format="csc")
    x = u.values.copy()
    lam = lambda_multiplier(u, model) if lam0 is None else float(lam0)
    tol_r = cfg.tol_r_for(u)

    F1, F2, res = _system(grid, model, x, lam, a)
    history = [res]
    steps = 0
    ok = False
    message = ""
    target = 1e-3 * tol_r
    mass_tol = 1e-12 * max(1.0, a * a)
    try:
        while True:
            if abs(2.0 * F2) <= mass_tol and res <= tol_r:
                # iterate to well below tolerance, stopping once the contraction stalls
                if res <= target or (steps > 0 and history[-1] > 0.1 * history[-2]):
                    ok = True
                    break
            if steps >= cfg.newton_max_iters:
                message = "newton_max_iters reached"
                break
            uu = x[:-1]
            A = K - sp.diags(W * model.fprime(uu) + lam * W, format="csc")
            col = sp.csc_matrix((-W * uu)[:, None])
            row = sp.csc_matrix((W * uu)[None, :])
            B = sp.bmat([[A, col], [row, None]], format="csc")
            with warnings.catch_warnings():
                warnings.simplefilter("error", spla.MatrixRankWarning)
                try:
                    dx = spla.spsolve(B, -np.concatenate([F1, [F2]]))
                except spla.MatrixRankWarning as exc:
                    raise RefinementError("singular linearization") from exc
            if not np.all(np.isfinite(dx)):
                raise RefinementError("non-finite Newton step")
            merit = res * res + F2 * F2
            t = 1.0
            while True:
                xt = x.copy()
                xt[:-1] += t * dx[:-1]
                lt = lam + t * dx[-1]
                try:
                    F1t, F2t, rest = _system(grid, model, xt, lt, a)
                except RangeError:
                    rest, F2t = math.inf, math.inf
                if rest * rest + F2t * F2t <= (1.0 - 1e-4 * t) * merit or merit < 1e-28:
                    break
                t *= 0.5
                if t < 1e-6:
                    raise RefinementError("damping failed to reduce the residual")
            x, lam, F1, F2, res = xt, lt, F1t, F2t, rest
            steps += 1
            history.append(res)
    except RefinementError as exc:
        if steps == 0 and history[0] <= tol_r:
            # the input already meets the tolerances; keep it
            return newton_refine(u, model, cfg, lam, _polish=False)
        rep = energy_report(u, model)
        return SolutionReport(u, rep.lam, rep, rep.J, 0, False, newton_iterations=steps,
                              newton_converged=False, newton_residuals=history,
                              message=f"refinement failed: {exc}", tol_q=cfg.tol_q_for(rep.gradSq),
                              tol_r=tol_r)

    v = project_sphere(RadialFunction(grid, x), a)
    lam_v = lambda_multiplier(v, model)
    rep = energy_report(v, model, lam_v)
    tol_q = cfg.tol_q_for(rep.gradSq)
    tol_r = cfg.tol_r_for(v)
    converged = ok and rep.residualL2 <= tol_r and abs(rep.Q) <= tol_q
    if not message:
        message = "converged" if converged else (
            "Pohozaev defect above tol_q" if ok and abs(rep.Q) > tol_q else "residual above tol_r")
    return SolutionReport(v, lam_v, rep, rep.J, 0, converged, newton_iterations=steps,
                          newton_converged=ok, newton_residuals=history, message=message,
                          tol_q=tol_q, tol_r=tol_r)


def solve(seed: RadialFunction, model: NonlinearityModel, cfg: SolveConfig) -> SolutionReport:
    """Minimax descent followed by Newton refinement."""
    mm = minimax_solve(seed, model, cfg)
    if mm.minimax_converged:
        nr = newton_refine(mm.profile, model, cfg, mm.lam)
    else:
        nr = None
    if nr is None or not nr.newton_converged:
        mm.message = mm.message if nr is None else f"{mm.message}; {nr.message}"
        if nr is not None:
            mm.newton_iterations = nr.newton_iterations
            mm.newton_residuals = nr.newton_residuals
        mm.converged = False
        return mm
    nr.iterations = mm.iterations
    nr.diagnostics = mm.diagnostics
    nr.iterates = mm.iterates
    nr.minimax_converged = True
    if model.N == 2 and nr.energy.gradSq >= 1.0 - cfg.a**2:
        nr.converged = False
        nr.message = "Moser-threshold: solution has |grad u|^2 >= 1 - a^2"
    return nr


@dataclass
class GeometryReport:
    K: float
    sup_A: float
    inf_B: float
    separated: bool
    positive_on_A: bool
    samples: int


def geometry_probe(model: NonlinearityModel, a: float, K: float, samples: int, grid: RadialGrid,
                   seed: int = 0, scale: float = 1.0) -> GeometryReport:
    """Sample J on A = {|grad u|^2 <= K} and B = {|grad u|^2 = 2K} inside S(a).

    Random profiles are moved to the target gradient norm along their
    dilation fiber; J of the dilated profile is the closed fiber formula.
    """
    if not K > 0:
        raise InvalidArgument("K must be positive")
    if model.N == 2 and not K < 0.5 * (1.0 - a * a):
        raise InvalidArgument(f"N = 2 requires K < (1 - a^2)/2 = {0.5 * (1 - a * a):g}")
    rng = np.random.default_rng(seed)
    sup_A, inf_B = -math.inf, math.inf
    pos = True
    for _ in range(samples):
        u = project_sphere(random_profile(grid, rng, scale), a)
        G = grad_norm_sq(u)
        frac = 0.05 + 0.95 * rng.random()
        sA = 0.5 * math.log(frac * K / G)
        sB = 0.5 * math.log(2.0 * K / G)
        JA = fiber_derivatives(u, sA, model, order=0, gsq=G)[0]
        JB = fiber_derivatives(u, sB, model, order=0, gsq=G)[0]
        sup_A = max(sup_A, JA)
        inf_B = min(inf_B, JB)
        pos = pos and JA > 0
    return GeometryReport(K, sup_A, inf_B, bool(0 < sup_A < inf_B), bool(pos), samples)
