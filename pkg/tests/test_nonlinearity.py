import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from normsol import CombinedPower, ExpCritical, F_eval, InvalidArgument, RangeError, f_eval, f_prime, verify_growth
from normsol.nonlinearity import ALPHA0, EXP_CAP

MODELS = [
    CombinedPower(50.0, 4.0, 3),
    CombinedPower(2.0, 3.5, 4),
    CombinedPower(1.0, 4.5, 3),
    ExpCritical(100.0, 6.0),
    ExpCritical(3.0, 4.5),
]
amplitudes = st.floats(-2.5, 2.5, allow_nan=False).filter(lambda t: abs(t) > 1e-3)


@pytest.mark.parametrize("t", [1e-3, 0.05, 0.3, 0.8, 1.5, 2.5])
@pytest.mark.parametrize("p", [4.5, 6.0, 9.0])
def test_exponential_primitive_matches_adaptive_quadrature(t, p):
    m = ExpCritical(7.0, p)
    ref, _ = integrate.quad(lambda x: float(m.f(x)), 0.0, t, epsabs=0.0, epsrel=1e-13, limit=200)
    assert float(m.F(t)) == pytest.approx(ref, rel=1e-10)
    assert float(m.F(-t)) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
@given(t=amplitudes)
def test_primitive_and_derivative_agree_with_finite_differences(model, t):
    h = 1e-6 * max(1.0, abs(t))
    dF = (F_eval(model, t + h) - F_eval(model, t - h)) / (2 * h)
    assert dF == pytest.approx(f_eval(model, t), rel=1e-6)
    df = (f_eval(model, t + h) - f_eval(model, t - h)) / (2 * h)
    assert df == pytest.approx(f_prime(model, t), rel=1e-6)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
@given(t=amplitudes)
def test_symmetry_and_positivity(model, t):
    assert f_eval(model, -t) == -f_eval(model, t)
    assert F_eval(model, -t) == F_eval(model, t)
    assert F_eval(model, t) > 0
    assert model.theta * F_eval(model, t) <= t * f_eval(model, t) * (1 + 1e-13)


def test_values_at_zero():
    for m in MODELS:
        assert f_eval(m, 0.0) == 0.0 and F_eval(m, 0.0) == 0.0


def test_critical_exponent_of_combined_power():
    assert CombinedPower(1.0, 4.0, 3).p_crit == 6.0
    assert CombinedPower(1.0, 3.5, 4).p_crit == 4.0
    m = CombinedPower(1.0, 4.0, 3)
    assert float(m.F(2.0)) == pytest.approx(16 / 4 + 64 / 6)


def test_exponential_model_refuses_amplitudes_beyond_cap():
    m = ExpCritical(1.0, 6.0)
    assert math.isfinite(float(m.F(EXP_CAP)))
    for fn in (m.f, m.F, m.fprime):
        with pytest.raises(RangeError):
            fn(np.array([0.1, 1.01 * EXP_CAP]))
    assert ALPHA0 * EXP_CAP**2 == pytest.approx(600.0)


@pytest.mark.parametrize("ctor", [
    lambda: CombinedPower(1.0, 2 + 4 / 3, 3),  # L2-critical
    lambda: CombinedPower(1.0, 6.0, 3),      # Sobolev-critical
    lambda: CombinedPower(-1.0, 4.0, 3),
    lambda: CombinedPower(1.0, 4.0, 2),
    lambda: CombinedPower(float("nan"), 4.0, 3),
    lambda: ExpCritical(1.0, 4.0),
    lambda: ExpCritical(0.0, 6.0),
])
def test_parameter_validation(ctor):
    with pytest.raises(InvalidArgument):
        ctor()


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
def test_growth_conditions_hold(model):
    t = np.concatenate((np.linspace(-3, 3, 20000), [0.0]))
    rep = verify_growth(model, t)
    assert rep.passed and rep.ar_margin >= 0 and rep.lower_margin >= 0
    assert rep.samples == 20000


def test_growth_verifier_detects_violation():
    class TooSteep(CombinedPower):
        @property
        def theta(self):
            return self.q + 1.0

    rep = verify_growth(TooSteep(5.0, 4.0, 3), np.linspace(-1, 1, 101))
    assert not rep.ar_pass and not rep.passed and rep.lower_pass
    with pytest.raises(InvalidArgument):
        verify_growth(MODELS[0], [0.0])
