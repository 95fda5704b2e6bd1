"""Mass-preserving dilation u -> e^{Ns/2} u(e^s x) and the search for the fiber maximum."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .energy import fiber_derivatives
from .errors import GeometryError, InvalidArgument, RangeError
from .radial import RadialFunction, grad_norm_sq, mass

__all__ = [
    "ResolutionWarning",
    "DilationResult",
    "dilate",
    "transfer",
    "golden_section_max",
    "max_over_dilations",
]

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MASS_DRIFT_WARN = 1e-4


class ResolutionWarning(UserWarning):
    """The grid cannot represent a dilated profile without losing mass."""


@dataclass
class DilationResult:
    profile: RadialFunction
    s: float
    massDrift: float


def dilate(u: RadialFunction, s: float, s_max: float = 4.0) -> DilationResult:
    """Resample H(u, s) on u's grid, then rescale to restore mass(u) exactly.

    The profile is interpolated with a monotone cubic and continued by zero
    beyond R.
    """
    s = float(s)
    if not math.isfinite(s) or abs(s) > s_max:
        raise RangeError(f"dilation |s| = {abs(s):.4g} exceeds s_max = {s_max:g}")
    if s == 0.0:
        return DilationResult(u, 0.0, 0.0)
    g = u.grid
    m0 = mass(u)
    if m0 == 0.0:
        return DilationResult(u, s, 0.0)
    vals = _evaluate_even(u, math.exp(s) * g.r)
    vals *= math.exp(0.5 * g.N * s)
    v = RadialFunction(g, vals)
    m1 = mass(v)
    if m1 == 0.0:
        raise RangeError(f"dilation by s = {s:g} leaves nothing on the grid")
    drift = abs(m1 - m0) / m0
    if drift > MASS_DRIFT_WARN:
        warnings.warn(
            f"dilation by s = {s:.3g} changed the mass by {drift:.2e} before renormalization",
            ResolutionWarning,
            stacklevel=2,
        )
    v = v * math.sqrt(m0 / m1)
    return DilationResult(v, s, drift)


def _evaluate_even(u: RadialFunction, x: np.ndarray) -> np.ndarray:
    """Monotone cubic interpolant of u at radii x, zero beyond R.

    Mirrored nodes make the interpolant even, so u'(0) = 0 is respected.
    """
    g = u.grid
    rr = np.concatenate((-g.r[:0:-1], g.r))
    uu = np.concatenate((u.values[:0:-1], u.values))
    out = np.zeros(len(x))
    inside = x <= g.R
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out[inside] = PchipInterpolator(rr, uu, extrapolate=False)(x[inside])
    return out


def transfer(u: RadialFunction, grid, s: float = 0.0) -> RadialFunction:
    """H(u, s) sampled on another grid of the same dimension (no renormalization)."""
    if grid.N != u.grid.N:
        raise InvalidArgument(f"cannot transfer an N = {u.grid.N} profile to an N = {grid.N} grid")
    vals = _evaluate_even(u, math.exp(s) * grid.r) * math.exp(0.5 * grid.N * s)
    return RadialFunction(grid, vals)


def golden_section_max(fn, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Maximize a unimodal ``fn`` on [lo, hi]; returns (x, fn(x))."""
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:  # ties keep the left point
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _safe_value(u, s, model, gsq):
    try:
        return fiber_derivatives(u, s, model, order=0, gsq=gsq)[0]
    except RangeError:
        # amplitude beyond the exponential cap: the energy there is hugely negative
        return -math.inf


def _scan(u, model, lo, hi, n, gsq):
    grid = np.linspace(lo, hi, n)
    vals = np.array([_safe_value(u, s, model, gsq) for s in grid])
    return grid, vals


def _polish(u, model, s, a, b, tol_q, gsq, iters):
    for _ in range(iters):
        _, d1, d2 = fiber_derivatives(u, s, model, order=2, gsq=gsq)
        if abs(d1) <= 1e-3 * tol_q or not d2 < 0:
            break
        s_new = min(max(s - d1 / d2, a), b)
        if s_new == s:
            break
        s = s_new
    val, d1 = fiber_derivatives(u, s, model, order=1, gsq=gsq)
    return s, val, d1


def max_over_dilations(u: RadialFunction, model, bracket=(-3.0, 3.0), tol_q: float | None = None,
                       scan_points: int = 61, newton_iters: int = 20, s_guess: float | None = None):
    """Maximizer s* of s -> J~(u, s) and the value J~(u, s*).

    Coarse scan, golden-section refinement around the best sample, then a
    safeguarded Newton polish on dJ~/ds (which equals Q(H(u, s))). With
    ``s_guess`` a local Newton solve near the guess is tried first.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise InvalidArgument(f"empty bracket {bracket!r}")
    gsq = grad_norm_sq(u)
    if gsq == 0.0:
        raise GeometryError("profile has zero gradient; the fiber energy has no interior maximum")
    if tol_q is None:
        tol_q = 1e-6 * max(1.0, gsq)

    if s_guess is not None and lo < s_guess < hi:
        a, b = max(lo, s_guess - 0.25), min(hi, s_guess + 0.25)
        try:
            s, val, d1 = _polish(u, model, float(s_guess), a, b, tol_q, gsq, newton_iters)
            if abs(d1) <= tol_q and a < s < b:
                return s, val
        except RangeError:
            pass

    for attempt in range(2):
        s_grid, vals = _scan(u, model, lo, hi, scan_points, gsq)
        k = int(np.argmax(vals))  # first occurrence: smallest s among ties
        if 0 < k < scan_points - 1 and math.isfinite(vals[k]):
            break
        if attempt == 0:
            lo, hi = lo - 1.0, hi + 1.0
            continue
        raise GeometryError(
            f"no interior maximum of the fiber energy on [{lo:g}, {hi:g}] (best sample at s = {s_grid[k]:g})"
        )

    peaks = np.flatnonzero((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:]))
    if len(peaks) > 1:
        log.info("fiber energy has %d local maxima on the scan (at s = %s); taking the largest",
                 len(peaks), ", ".join(f"{s_grid[i + 1]:.3g}" for i in peaks))
    a, b = s_grid[k - 1], s_grid[k + 1]
    s_star, _ = golden_section_max(lambda s: _safe_value(u, s, model, gsq), a, b, tol=1e-6 * (b - a))

    s_star, val, _ = _polish(u, model, s_star, a, b, tol_q, gsq, newton_iters)
    return s_star, val
