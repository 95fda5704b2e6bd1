import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from normsol import (
    InvalidArgument,
    RadialFunction,
    RangeError,
    augmented_energy,
    energy,
    energy_gradient,
    energy_report,
    inner_product,
    lambda_multiplier,
    pohozaev,
)
from normsol.energy import fiber_derivatives, residual
from normsol.fiber import dilate
from normsol.radial import grad_norm_sq, mass, random_profile


def scaled(grid, seed, amp):
    u = random_profile(grid, np.random.default_rng(seed))
    return u * (amp / np.max(np.abs(u.values)))


@pytest.fixture(scope="module", params=["power", "exp"])
def case(request, grid3, grid2, power_model, exp_model):
    if request.param == "power":
        return grid3, power_model, 1.0
    return grid2, exp_model, 0.4


@given(seed=st.integers(0, 10**6))
def test_gradient_matches_directional_difference(case, seed):
    grid, model, amp = case
    u, v = scaled(grid, seed, amp), scaled(grid, seed + 1, amp)
    eps = 1e-4
    fd = (energy(u + v * eps, model) - energy(u - v * eps, model)) / (2 * eps)
    an = inner_product(energy_gradient(u, model), v)
    assert fd == pytest.approx(an, rel=1e-5, abs=1e-9)


def richardson(fn, x, h=1e-3):
    d = lambda h: (fn(x + h) - fn(x - h)) / (2 * h)
    return (4 * d(h / 2) - d(h)) / 3


@given(seed=st.integers(0, 10**6), s=st.floats(-0.8, 0.8))
def test_fiber_derivatives_match_finite_differences(case, seed, s):
    grid, model, amp = case
    u = scaled(grid, seed, amp)
    val, d1, d2 = fiber_derivatives(u, s, model)
    scale = abs(val) + grad_norm_sq(u) * math.exp(2 * s)
    fd1 = richardson(lambda t: fiber_derivatives(u, t, model, order=0)[0], s)
    fd2 = richardson(lambda t: fiber_derivatives(u, t, model, order=1)[1], s)
    assert fd1 == pytest.approx(d1, abs=1e-7 * (scale + abs(d1)))
    assert fd2 == pytest.approx(d2, abs=1e-7 * (scale + abs(d2)))


def test_fiber_at_zero_is_energy_and_pohozaev(case):
    grid, model, amp = case
    u = scaled(grid, 3, amp)
    val, d1 = fiber_derivatives(u, 0.0, model, order=1)
    assert val == pytest.approx(energy(u, model), rel=1e-14)
    assert d1 == pytest.approx(pohozaev(u, model), rel=1e-12, abs=1e-14)


def test_augmented_energy_agrees_with_resampled_dilation(case):
    grid, model, amp = case
    u = scaled(grid, 5, amp)
    for s in (-0.4, 0.3):
        v = dilate(u, s).profile
        assert augmented_energy(u, s, model) == pytest.approx(energy(v, model), rel=1e-4)


def test_multiplier_makes_residual_orthogonal(case):
    grid, model, amp = case
    u = scaled(grid, 11, amp)
    lam = lambda_multiplier(u, model)
    assert inner_product(residual(u, model, lam), u) == pytest.approx(0.0, abs=1e-10 * mass(u))


def test_report_is_consistent(case):
    grid, model, amp = case
    u = scaled(grid, 13, amp)
    rep = energy_report(u, model)
    assert rep.J == pytest.approx(energy(u, model), rel=1e-14)
    assert rep.Q == pytest.approx(pohozaev(u, model), rel=1e-12)
    assert rep.lam == pytest.approx(lambda_multiplier(u, model), rel=1e-12)
    assert rep.J == pytest.approx(0.5 * rep.gradSq - rep.intF, rel=1e-14)
    d = rep.to_dict()
    assert "lambda" in d and "lam" not in d
    assert set(d) == {"J", "gradSq", "mass", "Q", "lambda", "residualL2", "intF", "intfu"}


def test_dimension_mismatch_and_cap(grid3, grid2, power_model, exp_model):
    with pytest.raises(InvalidArgument):
        energy(RadialFunction(grid2, np.exp(-grid2.r**2)), power_model)
    with pytest.raises(RangeError):
        energy(RadialFunction(grid2, 10 * np.exp(-grid2.r**2)), exp_model)
    with pytest.raises(InvalidArgument):
        lambda_multiplier(RadialFunction.zeros(grid3), power_model)
