"""The two nonlinearities f, their primitives F and derivatives f'.

``CombinedPower``  (N >= 3):  f(t) = mu |t|^{q-2} t + |t|^{2*-2} t,  2* = 2N/(N-2)
``ExpCritical``    (N = 2):   f(t) = mu sgn(t) |t|^{p-1} exp(4 pi t^2)

The primitive of the exponential model is the confluent hypergeometric
closed form

    F(t) = mu/p |t|^p 1F1(p/2; p/2 + 1; 4 pi t^2),

which is checked against adaptive quadrature of f in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgument, RangeError

__all__ = [
    "ALPHA0",
    "EXP_CAP",
    "CombinedPower",
    "ExpCritical",
    "NonlinearityModel",
    "GrowthReport",
    "f_eval",
    "F_eval",
    "f_prime",
    "verify_growth",
]

ALPHA0 = 4.0 * math.pi
# beyond this amplitude exp(4 pi t^2) (and 1F1) come within a few decades of overflow
EXP_CAP = math.sqrt(600.0 / ALPHA0)


class NonlinearityModel:
    """Common interface; concrete models are ``CombinedPower`` and ``ExpCritical``."""

    kind: str
    mu: float

    @property
    def theta(self) -> float:
        """Ambrosetti-Rabinowitz exponent: theta F(t) <= t f(t)."""
        raise NotImplementedError

    @property
    def lower_power(self) -> float:
        """Exponent p with sgn(t) f(t) >= mu |t|^{p-1}."""
        raise NotImplementedError

    def f(self, t):
        raise NotImplementedError

    def F(self, t):
        raise NotImplementedError

    def fprime(self, t):
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CombinedPower(NonlinearityModel):
    mu: float
    q: float
    N: int
    kind: str = "combined_power"

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 3:
            raise InvalidArgument(f"CombinedPower needs an integer N >= 3, got {self.N!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise InvalidArgument(f"mu must be positive, got {self.mu!r}")
        lo, hi = 2.0 + 4.0 / self.N, self.p_crit
        if not (lo < self.q < hi):
            raise InvalidArgument(f"q must lie in (2 + 4/N, 2*) = ({lo:g}, {hi:g}), got {self.q!r}")

    @property
    def p_crit(self) -> float:
        return 2.0 * self.N / (self.N - 2.0)

    @property
    def theta(self) -> float:
        return float(self.q)

    @property
    def lower_power(self) -> float:
        return float(self.q)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        return self.mu * a ** (self.q - 2.0) * t + a ** (self.p_crit - 2.0) * t

    def F(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return self.mu / self.q * a**self.q + a**self.p_crit / self.p_crit

    def fprime(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return self.mu * (self.q - 1.0) * a ** (self.q - 2.0) + (self.p_crit - 1.0) * a ** (self.p_crit - 2.0)

    def params(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "q": self.q, "N": self.N, "p_crit": self.p_crit}


def _guard(t):
    t = np.asarray(t, dtype=float)
    if t.size and np.max(np.abs(t)) > EXP_CAP:
        raise RangeError(
            f"amplitude {float(np.max(np.abs(t))):.4g} exceeds the exponential cap {EXP_CAP:.4g}"
        )
    return t


@dataclass(frozen=True)
class ExpCritical(NonlinearityModel):
    mu: float
    p: float
    kind: str = "exp_critical"

    N = 2

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise InvalidArgument(f"mu must be positive, got {self.mu!r}")
        if not (math.isfinite(self.p) and self.p > 4):
            raise InvalidArgument(f"p must exceed 4, got {self.p!r}")

    @property
    def theta(self) -> float:
        return float(self.p)

    @property
    def lower_power(self) -> float:
        return float(self.p)

    @property
    def tau(self) -> float:
        """Vanishing order at 0, f(t) = o(|t|^tau) for every tau < p - 1."""
        return float(self.p) - 1.0

    def f(self, t):
        t = _guard(t)
        a = np.abs(t)
        return self.mu * np.sign(t) * a ** (self.p - 1.0) * np.exp(ALPHA0 * t * t)

    def F(self, t):
        t = _guard(t)
        a = np.abs(t)
        b = 0.5 * self.p
        return self.mu / self.p * a**self.p * special.hyp1f1(b, b + 1.0, ALPHA0 * t * t)

    def fprime(self, t):
        t = _guard(t)
        a = np.abs(t)
        return self.mu * a ** (self.p - 2.0) * np.exp(ALPHA0 * t * t) * (self.p - 1.0 + 2.0 * ALPHA0 * t * t)

    def params(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "p": self.p, "N": 2, "alpha0": ALPHA0}


def f_eval(model: NonlinearityModel, t):
    return model.f(t)


def F_eval(model: NonlinearityModel, t):
    return model.F(t)


def f_prime(model: NonlinearityModel, t):
    return model.fprime(t)


@dataclass
class GrowthReport:
    ar_pass: bool          # theta F(t) <= t f(t) and F(t) > 0 at every sample
    ar_margin: float       # min over samples of (t f - theta F) / max(t f, tiny)
    lower_pass: bool       # sgn(t) f(t) >= mu |t|^{p-1}
    lower_margin: float
    theta: float
    samples: int
    note: str = "samples at t = 0 are dropped: the conditions are stated for t != 0"

    @property
    def passed(self) -> bool:
        return self.ar_pass and self.lower_pass


def verify_growth(model: NonlinearityModel, t_samples) -> GrowthReport:
    """Check the Ambrosetti-Rabinowitz and lower power-growth conditions on samples."""
    t = np.asarray(t_samples, dtype=float).ravel()
    t = t[t != 0.0]
    if t.size == 0:
        raise InvalidArgument("no nonzero samples")
    fv = model.f(t)
    Fv = model.F(t)
    tf = t * fv
    theta = model.theta
    # relative margin; exact equality is allowed, so round-off is absorbed at 1e-13
    scale = np.maximum(np.abs(tf), np.finfo(float).tiny)
    ar = (tf - theta * Fv) / scale
    ar_margin = float(ar.min())
    ar_pass = bool(np.all(Fv > 0) and ar_margin >= -1e-13)

    p = model.lower_power
    lower = np.sign(t) * fv - model.mu * np.abs(t) ** (p - 1.0)
    lower_rel = lower / np.maximum(np.abs(fv), np.finfo(float).tiny)
    lower_margin = float(lower_rel.min())
    lower_pass = lower_margin >= -1e-13
    return GrowthReport(ar_pass, ar_margin, lower_pass, lower_margin, theta, int(t.size))
