"""Energy, Pohozaev functional, Lagrange multiplier and the fiber-augmented energy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument, RangeError
from .nonlinearity import EXP_CAP, NonlinearityModel
from .radial import RadialFunction, grad_norm_sq, laplacian, mass

__all__ = [
    "EnergyReport",
    "energy",
    "energy_gradient",
    "pohozaev",
    "lambda_multiplier",
    "augmented_energy",
    "fiber_derivatives",
    "energy_report",
    "h1_norm",
]


@dataclass
class EnergyReport:
    J: float
    gradSq: float
    mass: float
    Q: float
    lam: float
    residualL2: float
    intF: float
    intfu: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _check(u: RadialFunction, model: NonlinearityModel, c: float = 1.0):
    if u.grid.N != model.N:
        raise InvalidArgument(f"grid dimension {u.grid.N} does not match model dimension {model.N}")
    if model.kind == "exp_critical":
        amp = c * float(np.max(np.abs(u.values)))
        if not amp <= EXP_CAP:
            raise RangeError(f"amplitude {amp:.4g} exceeds the exponential cap {EXP_CAP:.4g}")


def _sums(u, model, c=1.0, order=1):
    _check(u, model, c)
    return kernels.nonlinear_sums(model, u.values, u.grid.weights, c, order)


def energy(u: RadialFunction, model: NonlinearityModel) -> float:
    """J(u) = 1/2 |grad u|_2^2 - int F(u)."""
    SF, _, _ = _sums(u, model)
    return 0.5 * grad_norm_sq(u) - SF


def energy_gradient(u: RadialFunction, model: NonlinearityModel) -> RadialFunction:
    """L2 gradient of J: -lap u - f(u). Exact derivative of the discrete energy."""
    _check(u, model)
    return RadialFunction(u.grid, -laplacian(u).values - model.f(u.values))


def pohozaev(u: RadialFunction, model: NonlinearityModel) -> float:
    """Q(u) = |grad u|^2 + N int F(u) - N/2 int f(u) u."""
    SF, Sfu, _ = _sums(u, model)
    N = u.grid.N
    return grad_norm_sq(u) + N * SF - 0.5 * N * Sfu


def lambda_multiplier(u: RadialFunction, model: NonlinearityModel) -> float:
    m = mass(u)
    if not m > 0:
        raise InvalidArgument("Lagrange multiplier undefined for zero mass")
    _, Sfu, _ = _sums(u, model)
    return (grad_norm_sq(u) - Sfu) / m


def augmented_energy(u: RadialFunction, s: float, model: NonlinearityModel) -> float:
    """J(H(u, s)) evaluated in closed form from u, without resampling."""
    return fiber_derivatives(u, s, model, order=0)[0]


def fiber_derivatives(u: RadialFunction, s: float, model: NonlinearityModel, order: int = 2,
                      gsq: float | None = None):
    """Value and first ``order`` s-derivatives of s -> J~(u, s).

    With t = e^{Ns/2} u and phi(s) = e^{-Ns} int F(t), psi(s) = e^{-Ns} int f(t) t:
        phi' = -N phi + N/2 psi
        psi' = -N psi + N/2 e^{-Ns} int (f'(t) t^2 + f(t) t)
    """
    N = u.grid.N
    c = math.exp(0.5 * N * s)
    SF, Sfu, Sfp = _sums(u, model, c, order=2 if order >= 2 else 1)
    G = grad_norm_sq(u) if gsq is None else gsq
    e2 = math.exp(2.0 * s)
    en = math.exp(-N * s)
    phi = en * SF
    val = 0.5 * e2 * G - phi
    if order == 0:
        return (val,)
    psi = en * Sfu
    dphi = -N * phi + 0.5 * N * psi
    d1 = e2 * G - dphi
    if order == 1:
        return val, d1
    dpsi = -N * psi + 0.5 * N * en * (Sfp + Sfu)
    d2 = 2.0 * e2 * G - (-N * dphi + 0.5 * N * dpsi)
    return val, d1, d2


def h1_norm(u: RadialFunction) -> float:
    return math.sqrt(grad_norm_sq(u) + mass(u))


def residual(u: RadialFunction, model: NonlinearityModel, lam: float) -> RadialFunction:
    """-lap u - lam u - f(u)."""
    g = energy_gradient(u, model)
    return RadialFunction(u.grid, g.values - lam * u.values)


def energy_report(u: RadialFunction, model: NonlinearityModel, lam: float | None = None) -> EnergyReport:
    SF, Sfu, _ = _sums(u, model)
    G = grad_norm_sq(u)
    m = mass(u)
    N = u.grid.N
    if lam is None:
        lam = (G - Sfu) / m if m > 0 else 0.0
    res = residual(u, model, lam)
    return EnergyReport(
        J=0.5 * G - SF,
        gradSq=G,
        mass=m,
        Q=G + N * SF - 0.5 * N * Sfu,
        lam=lam,
        residualL2=math.sqrt(mass(res)),
        intF=SF,
        intfu=Sfu,
    )
