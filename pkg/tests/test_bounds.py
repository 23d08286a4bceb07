import numpy as np
import pytest
from copula_cases import compatible_cases

from ordered_copulas import (
    Discrete,
    Uniform,
    UnsupportedForDiscrete,
    inf_H,
    lower_bound_L,
    make_ordered_pair,
    ordered_joint_cdf,
    rectangle_mass,
    rogers_P,
    support_contains,
    upper_bound,
)


# lower bound L ---------------------------------------------------------------

def test_L_disjoint(disjoint_pair):
    L = lower_bound_L(disjoint_pair)
    assert L(1.5, 0.75) == pytest.approx(0.25, abs=1e-15)
    x1 = np.linspace(0.8, 2.2, 29)
    x2 = np.linspace(-0.2, 1.2, 29)
    a, b = np.meshgrid(x1, x2)
    F1, F2 = disjoint_pair.f1.cdf(a), disjoint_pair.f2.cdf(b)
    expect = np.where(a <= b, F1, np.maximum(F1 + F2 - 1, 0.0))
    np.testing.assert_allclose(L(a, b), expect, atol=1e-15)


def test_L_power_example(power_pair):
    assert lower_bound_L(power_pair)(0.75, 0.5) == pytest.approx(0.3125, abs=1e-15)


def test_L_closed_form_power(power_pair):
    x = np.linspace(0, 1, 41)
    a, b = np.meshgrid(x, x)
    hd = lambda s: s - s**2
    expect = np.where(a <= b, a**2, b - np.minimum(hd(b), hd(a)))
    np.testing.assert_allclose(lower_bound_L(power_pair)(a, b), expect, atol=1e-15)


def test_L_below_diagonal_is_F1(power_pair):
    assert lower_bound_L(power_pair)(0.3, 0.6) == pytest.approx(0.09)


def test_L_grid_path_matches_unimodal_path():
    pair = make_ordered_pair(Uniform(0.2, 1.0), Uniform(0.0, 1.0))
    ends = lower_bound_L(pair)
    object.__setattr__(pair, "unimodal_info", None)
    grid = lower_bound_L(pair)
    rng = np.random.default_rng(8)
    a, b = rng.uniform(-0.1, 1.1, size=(2, 300))
    np.testing.assert_allclose(grid(a, b), ends(a, b), atol=1e-12)


def test_inf_H_nonunimodal(wavy_pair):
    s = np.linspace(0.1, 0.9, 200001)
    brute = wavy_pair.H(s).min()
    got = inf_H(wavy_pair, 0.1, 0.9)
    assert got <= brute + 1e-15
    assert got == pytest.approx(brute, abs=1e-9)


# upper bound -----------------------------------------------------------------

def test_upper_uniforms():
    pair = make_ordered_pair(Uniform(0, 1), Uniform(0, 1))
    assert upper_bound(pair)(0.3, 0.7) == pytest.approx(0.3)


def test_upper_power(power_pair):
    assert upper_bound(power_pair)(0.5, 0.2) == pytest.approx(0.2)


def test_upper_margin(normal_pair):
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(upper_bound(normal_pair)(np.inf, x), normal_pair.f2.cdf(x))


# Rogers P --------------------------------------------------------------------

def test_P_equals_L_unimodal(power_pair):
    x = np.linspace(0, 1, 31)
    a, b = np.meshgrid(x, x)
    np.testing.assert_allclose(rogers_P(power_pair)(a, b), lower_bound_L(power_pair)(a, b),
                               atol=1e-12)


def test_P_below_diagonal(power_pair):
    assert rogers_P(power_pair)(0.2, 0.7) == pytest.approx(0.04)


@pytest.mark.parametrize("name", ["power", "wavy", "normal"])
def test_L_P_M_sandwich(name, power_pair, wavy_pair, normal_pair, rng):
    pair = {"power": power_pair, "wavy": wavy_pair, "normal": normal_pair}[name]
    lo, hi = pair.bounds
    a, b = rng.uniform(lo, hi, size=(2, 1000))
    L = lower_bound_L(pair)(a, b)
    P = rogers_P(pair)(a, b)
    M = upper_bound(pair)(a, b)
    assert np.all(L <= P + 1e-12)
    assert np.all(P <= M + 1e-12)


def test_P_equals_L_without_unimodality(wavy_pair):
    # an inner minimizer s in [v, x2] gives F2(v) - H(s) <= F1(s) <= F1(x2) <= L,
    # any other v gives at most L, so the supremum is attained at v = x2
    x = np.linspace(0.02, 0.98, 49)
    a, b = np.meshgrid(x, x)
    np.testing.assert_allclose(rogers_P(wavy_pair)(a, b), lower_bound_L(wavy_pair)(a, b),
                               atol=1e-12)


@pytest.mark.parametrize("name", ["power", "wavy", "normal", "disjoint"])
def test_L_two_increasing(name, power_pair, wavy_pair, normal_pair, disjoint_pair, rng):
    pair = {"power": power_pair, "wavy": wavy_pair, "normal": normal_pair,
            "disjoint": disjoint_pair}[name]
    lo, hi = pair.bounds
    p = rng.uniform(lo, hi, size=(4, 1000))
    a1, b1 = np.minimum(p[0], p[1]), np.maximum(p[0], p[1])
    a2, b2 = np.minimum(p[2], p[3]), np.maximum(p[2], p[3])
    assert np.all(rectangle_mass(lower_bound_L(pair), a1, b1, a2, b2) >= 0.0)


# sandwich for compatible copulas ---------------------------------------------

@pytest.mark.parametrize("case", compatible_cases(), ids=lambda c: c[0])
def test_compatible_joint_sandwich(case, rng):
    _, pair, C = case
    F = ordered_joint_cdf(pair, C)
    lo, hi = pair.bounds
    a, b = rng.uniform(lo - 0.1, hi + 0.1, size=(2, 1000))
    val = F(a, b)
    assert np.all(lower_bound_L(pair)(a, b) <= val + 1e-12)
    assert np.all(val <= upper_bound(pair)(a, b) + 1e-12)
    x = np.linspace(lo, hi, 33)
    np.testing.assert_allclose(F(x, np.inf), pair.f1.cdf(x), atol=1e-10)
    np.testing.assert_allclose(F(np.inf, x), pair.f2.cdf(x), atol=1e-10)


# support ---------------------------------------------------------------------

def test_support_examples(power_pair):
    assert support_contains(power_pair, 0.75, 0.25)
    assert not support_contains(power_pair, 0.6, 0.2)
    assert support_contains(power_pair, 0.3, 0.3)


def test_support_outside_marginal_supports(power_pair):
    assert not support_contains(power_pair, 1.5, 1.5)
    assert not support_contains(power_pair, 0.2, 0.5)


def test_support_disjoint_uniforms(disjoint_pair):
    # L is the countermonotone coupling: X1 = 2 - X2
    assert support_contains(disjoint_pair, 1.25, 0.75)
    assert not support_contains(disjoint_pair, 1.25, 0.5)
    assert not support_contains(disjoint_pair, 0.5, 0.5)


def test_support_discrete_unsupported():
    F = Discrete([0, 1], [0.5, 0.5])
    with pytest.raises(UnsupportedForDiscrete):
        support_contains(make_ordered_pair(F, F), 1, 0)


def _square_mass(L, x1, x2, eps):
    return rectangle_mass(L, x1 - eps, x1 + eps, x2 - eps, x2 + eps)


@pytest.mark.parametrize("pt", [(0.75, 0.25), (0.9, 0.1), (0.3, 0.3), (0.6, 0.6), (0.55, 0.45)])
def test_support_points_carry_mass(power_pair, pt):
    assert support_contains(power_pair, *pt)
    L = lower_bound_L(power_pair)
    for eps in (0.05, 0.01):
        assert _square_mass(L, *pt, eps) > 0.0


@pytest.mark.parametrize("pt", [(0.9, 0.5), (0.6, 0.1), (0.95, 0.6)])
def test_points_far_from_support_carry_no_mass(power_pair, pt):
    assert not support_contains(power_pair, *pt)
    assert _square_mass(lower_bound_L(power_pair), *pt, 0.01) < 1e-6
