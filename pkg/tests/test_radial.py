import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from normsol import InvalidArgument, RadialFunction, geometric_ratio, make_grid
from normsol.radial import (
    dirichlet_form,
    grad_norm_sq,
    inner_product,
    laplacian,
    lp_norm_pow,
    mass,
    random_profile,
    sphere_area,
    stiffness_apply,
)


def quad_moment(N, fn, R=np.inf):
    val, _ = integrate.quad(lambda r: r ** (N - 1) * fn(r), 0.0, R, epsabs=0, epsrel=1e-13, limit=200)
    return sphere_area(N) * val


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("grading,ratio", [("uniform", 1.0), ("geometric", 1.003)])
def test_weights_sum_to_ball_volume(N, grading, ratio):
    g = make_grid(N, 7.5, 700, grading, ratio)
    assert g.weights.sum() == pytest.approx(sphere_area(N) * 7.5**N / N, rel=1e-13)
    assert np.all(g.weights > 0)


def test_sphere_area_values():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("N", [2, 3])
def test_gaussian_integrals_match_quadrature_oracle(N):
    g = make_grid(N, 12.0, 6000)
    u = RadialFunction.from_callable(g, lambda r: np.exp(-r * r))
    assert mass(u) == pytest.approx(quad_moment(N, lambda r: np.exp(-2 * r * r)), rel=1e-5)
    assert lp_norm_pow(u, 3.0) == pytest.approx(quad_moment(N, lambda r: np.exp(-3 * r * r)), rel=1e-5)
    gs = quad_moment(N, lambda r: (2 * r * np.exp(-r * r)) ** 2)
    assert grad_norm_sq(u) == pytest.approx(gs, rel=1e-5)


def test_laplacian_of_gaussian_at_origin_and_inside(grid3):
    u = RadialFunction.from_callable(grid3, lambda r: np.exp(-r * r))
    exact = (4 * grid3.r**2 - 6) * np.exp(-grid3.r**2)
    lap = laplacian(u).values
    inner = grid3.r < 10
    assert np.max(np.abs(lap - exact)[inner]) < 1e-3
    assert lap[-1] == 0.0


@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([2, 3, 5]))
def test_summation_by_parts(seed, N):
    g = make_grid(N, 5.0, 60, "geometric", 1.02)
    rng = np.random.default_rng(seed)
    u = RadialFunction(g, rng.normal(size=g.M))
    v = RadialFunction(g, rng.normal(size=g.M))
    lhs = inner_product(laplacian(u), v)
    rhs = -dirichlet_form(u, v)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * (abs(rhs) + 1))
    assert dirichlet_form(u, v) == pytest.approx(dirichlet_form(v, u), rel=1e-12)
    assert grad_norm_sq(u) == pytest.approx(dirichlet_form(u, u), rel=1e-12)
    assert np.dot(stiffness_apply(g, u.values), v.values) == pytest.approx(-rhs, rel=1e-10, abs=1e-10)


@given(st.floats(5.0, 200.0), st.integers(50, 9000), st.floats(1e-4, 0.9))
def test_geometric_ratio_reproduces_first_spacing(R, M, frac):
    h1 = frac * R / (M - 1)
    ratio = geometric_ratio(R, M, h1)
    if ratio ** (M - 2) > 1e250:
        return
    g = make_grid(3, R, M, "geometric", ratio)
    assert g.dr[0] == pytest.approx(h1, rel=1e-7)
    assert g.r[-1] == R
    assert np.all(np.diff(g.dr) > 0)


def test_geometric_ratio_rejects_spacing_too_large():
    with pytest.raises(InvalidArgument):
        geometric_ratio(10.0, 11, 1.0)
    with pytest.raises(InvalidArgument):
        geometric_ratio(10.0, 11, 0.0)


@pytest.mark.parametrize("kwargs", [
    dict(N=1, R=1.0, M=10), dict(N=3, R=-1.0, M=10), dict(N=3, R=float("inf"), M=10),
    dict(N=3, R=1.0, M=2), dict(N=2.5, R=1.0, M=10), dict(N=3, R=1.0, M=10, grading="log"),
    dict(N=3, R=1.0, M=10, grading="geometric", ratio=1.0),
])
def test_make_grid_rejects_bad_arguments(kwargs):
    with pytest.raises(InvalidArgument):
        make_grid(**kwargs)


def test_radial_function_contract(grid3, grid2):
    u = RadialFunction(grid3, np.ones(grid3.M))
    assert u.values[-1] == 0.0
    with pytest.raises(ValueError):
        u.values[0] = 2.0
    with pytest.raises(InvalidArgument):
        RadialFunction(grid3, np.ones(3))
    with pytest.raises(InvalidArgument):
        RadialFunction(grid3, np.full(grid3.M, np.nan))
    with pytest.raises(InvalidArgument):
        inner_product(u, RadialFunction(grid2, np.ones(grid2.M)))
    with pytest.raises(InvalidArgument):
        lp_norm_pow(u, 0.5)
    assert mass((u * 2.0) - u - u) == 0.0


def test_random_profile_is_grid_independent(rng):
    g1 = make_grid(3, 30.0, 500)
    g2 = make_grid(3, 30.0, 999)
    u1 = random_profile(g1, np.random.default_rng(7))
    u2 = random_profile(g2, np.random.default_rng(7))
    assert np.allclose(u1.values, u2.values[::2], atol=1e-12)
