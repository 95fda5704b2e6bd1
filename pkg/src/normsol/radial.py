"""Radial functions on a truncated ball in R^N.

Discretization
--------------
Nodes ``0 = r_0 < r_1 < ... < r_{M-1} = R``. Each node owns the dual cell
between the neighbouring edge midpoints, and its quadrature weight is the
exact volume of that spherical shell::

    w_i = |S^{N-1}| / N * (r_{i+1/2}^N - r_{i-1/2}^N)

(half cells at both ends). Integrals are ``sum_i w_i g(r_i)``; this is exact
for constants and second order for smooth integrands.

The Dirichlet form uses one-sided differences centred on the edge midpoints,
weighted by the face area ``|S^{N-1}| r_{i+1/2}^{N-1}``::

    D(u, v) = sum_i A_{i+1/2} (u_{i+1} - u_i)(v_{i+1} - v_i) / (r_{i+1} - r_i)

and the Laplacian is the flux balance over each dual cell, so that
``<lap u, v> = -D(u, v)`` holds exactly for ``v`` vanishing at ``R``. At the
origin the balance reduces to ``2N (u_1 - u_0) / h^2``, the ghost-node
evaluation of ``N u''(0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .errors import InvalidArgument

__all__ = [
    "geometric_ratio",
    "RadialGrid",
    "RadialFunction",
    "make_grid",
    "sphere_area",
    "mass",
    "lp_norm_pow",
    "grad_norm_sq",
    "dirichlet_form",
    "laplacian",
    "inner_product",
]


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def _shell_volume(a, b, N):
    # b^N - a^N factored to avoid cancellation on thin shells far from the origin
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.zeros(np.broadcast(a, b).shape)
    for k in range(N):
        s = s + a**k * b ** (N - 1 - k)
    return (b - a) * s / N


@dataclass(frozen=True, eq=False)
class RadialGrid:
    N: int
    R: float
    M: int
    grading: str
    ratio: float
    r: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    dr: np.ndarray = field(repr=False)
    faces: np.ndarray = field(repr=False)
    face_area: np.ndarray = field(repr=False)
    coupling: np.ndarray = field(repr=False)     # face_area / dr, the stiffness edge weights

    @property
    def omega(self) -> float:
        return sphere_area(self.N)

    @property
    def h_min(self) -> float:
        return float(self.dr.min())

    def meta(self) -> dict:
        return {"N": self.N, "R": self.R, "M": self.M, "grading": self.grading, "ratio": self.ratio}

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.N == other.N and self.M == other.M and np.array_equal(self.r, other.r)
        )


def geometric_ratio(R: float, M: int, h_first: float) -> float:
    """Spacing ratio of the geometric grid on [0, R] with M nodes whose first
    spacing is ``h_first``."""
    R, h_first = float(R), float(h_first)
    if not (0 < h_first < R / (M - 1)):
        raise InvalidArgument(f"first spacing must lie in (0, R/(M-1)), got {h_first!r}")
    n = M - 1

    def excess(x):
        # h1 * ((1+x)^n - 1) / x - R, written to stay finite for large n*x
        y = n * math.log1p(x)
        return math.log(h_first) + y + math.log(-math.expm1(-y)) - math.log(x) - math.log(R)

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    return 1.0 + optimize.brentq(excess, 1e-15, hi, xtol=1e-16, rtol=1e-15)


def make_grid(N: int, R: float, M: int, grading: str = "uniform", ratio: float = 1.0) -> RadialGrid:
    """Build a radial grid on [0, R].

    ``grading`` is ``"uniform"`` or ``"geometric"``; for the latter consecutive
    spacings grow by ``ratio`` (> 1), which packs nodes near the origin.
    """
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise InvalidArgument(f"dimension N must be an integer >= 2, got {N!r}")
    if isinstance(M, bool) or int(M) != M or M < 3:
        raise InvalidArgument(f"node count M must be an integer >= 3, got {M!r}")
    R = float(R)
    if not math.isfinite(R) or R <= 0:
        raise InvalidArgument(f"truncation radius R must be positive and finite, got {R!r}")
    N, M = int(N), int(M)

    if grading == "uniform":
        r = np.linspace(0.0, R, M)
        ratio = 1.0
    elif grading == "geometric":
        ratio = float(ratio)
        if not math.isfinite(ratio) or ratio <= 1.0:
            raise InvalidArgument(f"geometric ratio must be > 1, got {ratio!r}")
        # spacings h1 * ratio^k, summing to R
        k = np.arange(M - 1, dtype=float)
        logsteps = k * math.log(ratio)
        steps = np.exp(logsteps - logsteps[-1])
        steps *= R / steps.sum()
        r = np.concatenate(([0.0], np.cumsum(steps)))
        r[-1] = R
        if not np.all(np.diff(r) > 0):
            raise InvalidArgument("geometric ratio too large for M: spacings underflow")
    else:
        raise InvalidArgument(f"unknown grading {grading!r}")

    dr = np.diff(r)
    faces = 0.5 * (r[:-1] + r[1:])
    omega = sphere_area(N)
    edges = np.concatenate(([0.0], faces, [R]))
    weights = omega * _shell_volume(edges[:-1], edges[1:], N)
    face_area = omega * faces ** (N - 1)
    coupling = face_area / dr

    for arr in (r, dr, faces, weights, face_area, coupling):
        arr.setflags(write=False)
    return RadialGrid(N, R, M, grading, ratio, r, weights, dr, faces, face_area, coupling)


class RadialFunction:
    """Values of a radial profile on a grid, with ``u(R) = 0`` enforced."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        v = np.array(values, dtype=float)
        if v.shape != (grid.M,):
            raise InvalidArgument(f"expected {grid.M} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("profile values must be finite")
        v[-1] = 0.0
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    @classmethod
    def from_callable(cls, grid: RadialGrid, fn) -> "RadialFunction":
        return cls(grid, fn(grid.r))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialFunction":
        return cls(grid, np.zeros(grid.M))

    def __mul__(self, c):
        return RadialFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        _check_same(self, other)
        return RadialFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return RadialFunction(self.grid, self.values - other.values)

    def __neg__(self):
        return RadialFunction(self.grid, -self.values)

    def __repr__(self):
        return f"RadialFunction(N={self.grid.N}, M={self.grid.M}, max|u|={np.abs(self.values).max():.3g})"


def _check_same(u: RadialFunction, v: RadialFunction):
    if not u.grid.same_as(v.grid):
        raise InvalidArgument("radial functions live on different grids")


def mass(u: RadialFunction) -> float:
    """Squared L2 norm, the integral of u^2 over R^N."""
    return float(np.dot(u.grid.weights, u.values * u.values))


def lp_norm_pow(u: RadialFunction, xi: float) -> float:
    """Integral of |u|^xi (the xi-th power of the L^xi norm)."""
    if not xi >= 1:
        raise InvalidArgument(f"exponent must be >= 1, got {xi!r}")
    return float(np.dot(u.grid.weights, np.abs(u.values) ** xi))


def inner_product(u: RadialFunction, v: RadialFunction) -> float:
    _check_same(u, v)
    return float(np.dot(u.grid.weights, u.values * v.values))


def dirichlet_form(u: RadialFunction, v: RadialFunction) -> float:
    """Discrete version of the integral of grad u . grad v."""
    _check_same(u, v)
    g = u.grid
    return float(np.dot(g.coupling, np.diff(u.values) * np.diff(v.values)))


def grad_norm_sq(u: RadialFunction) -> float:
    return kernels.dirichlet_sum(u.values, u.grid.coupling)


def stiffness_apply(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """K u, where ``u^T K v = D(u, v)``; row M-1 is left out (set to zero)."""
    flux = grid.coupling * np.diff(values)
    out = np.zeros_like(values)
    out[:-1] -= flux
    out[1:] += flux
    out[-1] = 0.0
    return out


def stiffness_bands(grid: RadialGrid):
    """Diagonal and off-diagonal of K restricted to the free nodes 0..M-2."""
    c = grid.coupling
    diag = np.zeros(grid.M - 1)
    diag += c
    diag[1:] += c[:-1]
    off = -c[:-1]
    return diag, off


def laplacian(u: RadialFunction) -> RadialFunction:
    """Discrete radial Laplacian u'' + (N-1)/r u'; the value at r = R is set to 0."""
    g = u.grid
    lap = -stiffness_apply(g, u.values) / g.weights
    return RadialFunction(g, lap)


def random_profile(grid: RadialGrid, rng: np.random.Generator, scale: float = 1.0, terms: int = 3) -> RadialFunction:
    """Smooth random radial profile: a sum of Gaussian bumps of mixed sign.

    Bump centres lie in [0, 2 scale) and widths in [0.5, 2) scale, so the
    profile is negligible at R when R >> scale.
    """
    r = grid.r
    vals = np.zeros(grid.M)
    for _ in range(terms):
        c = rng.normal()
        x0 = 2.0 * scale * rng.random()
        w = scale * (0.5 + 1.5 * rng.random())
        vals += c * (np.exp(-(((r - x0) / w) ** 2)) + np.exp(-(((r + x0) / w) ** 2)))
    if not np.any(vals):
        vals = np.exp(-((r / scale) ** 2))
    return RadialFunction(grid, vals)
