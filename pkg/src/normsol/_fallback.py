"""Pure-numpy versions of the hot kernels (used when the extension is absent)."""

import math

import numpy as np
from scipy import special

ALPHA0 = 4.0 * math.pi


def power_sums(u, w, c, mu, q, pc, order):
    """Weighted sums over nodes of F(t), f(t) t and, if ``order == 2``, f'(t) t^2,
    where t = c u and f(t) = mu |t|^{q-2} t + |t|^{pc-2} t."""
    a = np.abs(c * u)
    aq = a**q
    ap = a**pc
    SF = float(np.dot(w, mu / q * aq + ap / pc))
    Sfu = float(np.dot(w, mu * aq + ap))
    if order < 2:
        return SF, Sfu, 0.0
    Sfp = float(np.dot(w, mu * (q - 1.0) * aq + (pc - 1.0) * ap))
    return SF, Sfu, Sfp


def exp_sums(u, w, c, mu, p, order):
    """Same sums for f(t) = mu sgn(t) |t|^{p-1} exp(4 pi t^2)."""
    t = c * u
    z = ALPHA0 * t * t
    ap = np.abs(t) ** p
    b = 0.5 * p
    SF = float(np.dot(w, mu / p * ap * special.hyp1f1(b, b + 1.0, z)))
    e = np.exp(z)
    Sfu = float(np.dot(w, mu * ap * e))
    if order < 2:
        return SF, Sfu, 0.0
    Sfp = float(np.dot(w, mu * ap * e * (p - 1.0 + 2.0 * z)))
    return SF, Sfu, Sfp


def dirichlet_sum(u, coef):
    du = np.diff(u)
    return float(np.dot(coef, du * du))
