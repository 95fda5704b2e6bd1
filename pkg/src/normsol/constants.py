"""Sobolev, Gagliardo-Nirenberg and Trudinger-Moser quantities on radial grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidArgument, RangeError
from .nonlinearity import ALPHA0
from .radial import (
    RadialFunction,
    RadialGrid,
    geometric_ratio,
    grad_norm_sq,
    lp_norm_pow,
    make_grid,
    mass,
    random_profile,
)

__all__ = [
    "InequalityReport",
    "ExpIntegrabilityReport",
    "sobolev_grid",
    "sobolev_constant",
    "rayleigh_quotient",
    "gn_ratio",
    "gn_constant_estimate",
    "moser_functional",
    "moser_bound_estimate",
    "moser_grid",
    "moser_sequence",
    "moser_sequence_values",
    "exp_integrability_probe",
]

# exponent beyond which exp() leaves the double range with a safety margin
EXP_ARG_CAP = 600.0


@dataclass
class InequalityReport:
    name: str
    value: float
    parameters: dict = field(default_factory=dict)
    gridMeta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "parameters": dict(self.parameters),
                "gridMeta": dict(self.gridMeta)}


def _crit_exponent(N: int) -> float:
    return 2.0 * N / (N - 2.0)


def rayleigh_quotient(u: RadialFunction) -> float:
    """|grad u|_2^2 / |u|_{2*}^2, the quotient whose infimum is S."""
    N = u.grid.N
    if N < 3:
        raise InvalidArgument("the Sobolev quotient needs N >= 3")
    ps = _crit_exponent(N)
    denom = lp_norm_pow(u, ps)
    if not denom > 0:
        raise InvalidArgument("zero profile has no Sobolev quotient")
    return grad_norm_sq(u) / denom ** (2.0 / ps)


def sobolev_grid(N: int = 3, R: float = 200.0, M: int = 4000) -> RadialGrid:
    """Geometric grid suited to Talenti bubbles; the first spacing is 1e-5 at M = 4000
    and shrinks like 1/M, independently of R."""
    h_first = 1e-5 * 4000.0 / M
    return make_grid(N, R, M, "geometric", geometric_ratio(R, M, h_first))


def _talenti(grid: RadialGrid, eps: float) -> RadialFunction:
    N = grid.N
    v = (1.0 + (grid.r / eps) ** 2) ** (-(N - 2) / 2.0)
    return RadialFunction(grid, v - v[-1])


def sobolev_constant(N: int, grid: RadialGrid, min_nodes: int | None = None) -> InequalityReport:
    """Smallest Rayleigh quotient over truncated Talenti bubbles (1 + (r/eps)^2)^{-(N-2)/2}.

    Bubbles narrower than the first ``min_nodes`` nodes (default M/20) are
    excluded: below that width the discrete gradient underestimates the
    peak and the quotient would drop under S for purely numerical reasons.
    On the truncated ball the quotient decreases towards S as eps/R -> 0, so
    the minimum usually sits at the resolution limit.
    """
    if isinstance(N, bool) or int(N) != N or N < 3:
        raise InvalidArgument(f"sobolev_constant needs an integer N >= 3, got {N!r}")
    if grid.N != N:
        raise InvalidArgument(f"grid dimension {grid.N} does not match N = {N}")
    k = max(2, grid.M // 20) if min_nodes is None else int(min_nodes)
    if not 1 <= k < grid.M - 1:
        raise InvalidArgument(f"min_nodes must lie in [1, M-1), got {min_nodes!r}")
    lo, hi = math.log(grid.r[k]), math.log(0.1 * grid.R)
    if not lo < hi:
        raise InvalidArgument("grid too coarse near the origin to resolve any bubble")

    def q(le):
        return rayleigh_quotient(_talenti(grid, math.exp(le)))

    scan = np.linspace(lo, hi, 41)
    vals = np.array([q(x) for x in scan])
    j = int(np.argmin(vals))
    best_x, best = scan[j], vals[j]
    if 0 < j < len(scan) - 1:
        res = minimize_scalar(q, bounds=(scan[j - 1], scan[j + 1]), method="bounded",
                              options={"xatol": 1e-8})
        if res.fun < best:
            best_x, best = float(res.x), float(res.fun)
    return InequalityReport("sobolev", float(best), {"N": float(N), "epsilon": math.exp(best_x),
                                                     "epsilon_min": math.exp(lo)}, grid.meta())


def gn_ratio(u: RadialFunction, xi: float) -> float:
    """|u|_xi / (|grad u|_2^gamma |u|_2^{1-gamma}) with gamma = N (1/2 - 1/xi)."""
    N = u.grid.N
    xi = float(xi)
    if not xi > 2 or (N >= 3 and not xi < _crit_exponent(N)):
        raise InvalidArgument(f"exponent xi = {xi!r} outside (2, 2*)")
    m = mass(u)
    G = grad_norm_sq(u)
    if not (m > 0 and G > 0):
        raise InvalidArgument("gn_ratio is undefined for the zero profile")
    gamma = N * (0.5 - 1.0 / xi)
    num = lp_norm_pow(u, xi) ** (1.0 / xi)
    return num / (G ** (0.5 * gamma) * m ** (0.5 * (1.0 - gamma)))


def gn_constant_estimate(grid: RadialGrid, xi: float, samples: int = 200, seed: int = 0,
                         scale: float = 1.0) -> InequalityReport:
    """Largest gn_ratio over seeded random profiles: an empirical lower bound for C(xi, N)."""
    rng = np.random.default_rng(seed)
    best = max(gn_ratio(random_profile(grid, rng, scale), xi) for _ in range(samples))
    return InequalityReport("gagliardo_nirenberg", float(best),
                            {"xi": float(xi), "gamma": grid.N * (0.5 - 1.0 / xi),
                             "samples": float(samples), "seed": float(seed)}, grid.meta())


def _require_plane(grid: RadialGrid):
    if grid.N != 2:
        raise InvalidArgument(f"Trudinger-Moser quantities need N = 2, got N = {grid.N}")


def moser_functional(u: RadialFunction, alpha: float) -> float:
    """Integral of exp(alpha u^2) - 1."""
    _require_plane(u.grid)
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha!r}")
    arg = alpha * u.values * u.values
    top = float(np.max(arg))
    if not top <= EXP_ARG_CAP:
        raise RangeError(f"alpha u^2 reaches {top:.4g}, beyond the exponential cap {EXP_ARG_CAP:g}")
    return float(np.dot(u.grid.weights, np.expm1(arg)))


def moser_bound_estimate(grid: RadialGrid, alpha: float, samples: int = 100, seed: int = 0,
                         mass_bound: float = 0.9, scale: float = 1.0) -> InequalityReport:
    """Max of moser_functional over random u with |grad u|^2 <= 1 and |u|_2 <= mass_bound.

    Each sample is scaled up until one of the two constraints is active.
    """
    _require_plane(grid)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        u = random_profile(grid, rng, scale)
        c = min(1.0 / math.sqrt(grad_norm_sq(u)), mass_bound / math.sqrt(mass(u)))
        best = max(best, moser_functional(u * c, alpha))
    return InequalityReport("trudinger_moser", best,
                            {"alpha": float(alpha), "mass_bound": float(mass_bound),
                             "samples": float(samples), "seed": float(seed)}, grid.meta())


def moser_grid(n_max: float, M: int = 4000) -> RadialGrid:
    """Planar geometric grid on [0, 2] that resolves the kink of m_n at r = 1/n_max."""
    return make_grid(2, 2.0, M, "geometric", geometric_ratio(2.0, M, 0.05 / n_max))


def moser_sequence(grid: RadialGrid, n: float) -> RadialFunction:
    """Truncated logarithm with |grad m_n|_2 = 1:

        sqrt(log n)                   r <= 1/n
        log(1/r) / sqrt(log n)        1/n <= r <= 1
        0                             r >= 1

    all divided by sqrt(2 pi).
    """
    _require_plane(grid)
    if not n > 1:
        raise InvalidArgument(f"concentration parameter must exceed 1, got {n!r}")
    if grid.R < 1.0:
        raise InvalidArgument("the Moser profile needs R >= 1")
    L = math.log(n)
    r = grid.r
    with np.errstate(divide="ignore"):
        vals = np.where(r <= 1.0 / n, math.sqrt(L), np.log(1.0 / np.maximum(r, 1e-300)) / math.sqrt(L))
    vals = np.where(r >= 1.0, 0.0, vals) / math.sqrt(2.0 * math.pi)
    return RadialFunction(grid, vals)


def moser_sequence_values(grid: RadialGrid, alpha: float, ns) -> list[InequalityReport]:
    out = []
    for n in ns:
        m = moser_sequence(grid, n)
        out.append(InequalityReport("trudinger_moser", moser_functional(m, alpha),
                                    {"alpha": float(alpha), "n": float(n),
                                     "gradSq": grad_norm_sq(m)}, grid.meta()))
    return out


@dataclass
class ExpIntegrabilityReport:
    t: float
    m: float                 # sup over the sequence of |grad u|^2 + |u|^2
    tm_below_one: bool
    hypothesis: bool         # sup |grad u|^2 < 1 - a^2
    sup_grad_sq: float
    values: list
    max_value: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def exp_integrability_probe(u_seq, t: float, a: float | None = None) -> ExpIntegrabilityReport:
    """Evaluate the integral of (exp(4 pi u^2) - 1)^t along a sequence.

    ``a`` defaults to the L2 norm of the first element. Hypothesis failures
    are reported in the fields, never raised.
    """
    t = float(t)
    if not t > 1:
        raise InvalidArgument(f"t must exceed 1, got {t!r}")
    seq = list(u_seq)
    if not seq:
        raise InvalidArgument("empty sequence")
    for u in seq:
        _require_plane(u.grid)
    if a is None:
        a = math.sqrt(mass(seq[0]))
    values = []
    sup_g, m = 0.0, 0.0
    for u in seq:
        G = grad_norm_sq(u)
        sup_g = max(sup_g, G)
        m = max(m, G + mass(u))
        arg = ALPHA0 * u.values * u.values
        if float(np.max(arg)) > EXP_ARG_CAP:
            values.append(math.inf)
            continue
        values.append(float(np.dot(u.grid.weights, np.expm1(arg) ** t)))
    return ExpIntegrabilityReport(t, m, bool(t * m < 1.0), bool(sup_g < 1.0 - a * a), sup_g,
                                  values, max(values))
