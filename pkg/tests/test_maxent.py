import numpy as np
import pytest

from ordered_copulas import (
    DiagonalSection,
    Discrete,
    NoMaxEnt,
    Unsupported,
    WrongBranch,
    c_density_general,
    cbar_density,
    comonotone_diagonal,
    differential_entropy,
    entropy_condition,
    make_ordered_pair,
    maxent_joint_density,
    power_diagonal,
)
from ordered_copulas.quadrature import integrate, integrate_triangle


def example_density(x1, x2):
    return np.where(x1 >= x2, 2 * (1 - x1) / (1 - x2) ** 2, 0.0)


@pytest.fixture(scope="module")
def example_maxent(power_pair):
    return maxent_joint_density(power_pair)


# entropy condition -----------------------------------------------------------

def test_condition_example(power_pair):
    assert entropy_condition(power_pair)


def test_condition_identical(identical_pair):
    assert not entropy_condition(identical_pair)


def test_condition_exponentials(exp_pair):
    assert entropy_condition(exp_pair)


def test_condition_discrete_unsupported():
    F = Discrete([0, 1], [0.5, 0.5])
    with pytest.raises(Unsupported):
        entropy_condition(make_ordered_pair(F, F))


def test_condition_unequal_supports(disjoint_pair):
    with pytest.raises(Unsupported):
        entropy_condition(disjoint_pair)


# simple copula density -------------------------------------------------------

def test_cbar_square_diagonal_point():
    c = cbar_density(power_diagonal(2.0))
    assert c(0.5, 0.5) == pytest.approx(1.0, abs=1e-14)


def test_cbar_square_diagonal_closed_form():
    # delta = t^2: gap s(1 - s), int_u^v ds / (s (1 - s)) = log(v (1 - u) / (u (1 - v)))
    c = cbar_density(power_diagonal(2.0))
    u, v = 0.2, 0.7
    expect = (2 * v) * (2 - 2 * u) / (4 * np.sqrt(u * (1 - u) * v * (1 - v)))
    expect *= np.sqrt(u * (1 - v) / (v * (1 - u)))
    assert c(u, v) == pytest.approx(expect, rel=1e-12)


def test_cbar_symmetric():
    c = cbar_density(power_diagonal(1.6))
    rng = np.random.default_rng(1)
    u, v = rng.uniform(size=(2, 200))
    np.testing.assert_allclose(c(u, v), c(v, u), rtol=0, atol=0)


@pytest.mark.parametrize("k", [1.5, 2.0])
def test_cbar_is_copula_density(k):
    c = cbar_density(power_diagonal(k))
    total = integrate_triangle(lambda v, u: c(u, v), 0.0, 1.0, atol=1e-9, outer_atol=1e-8)
    assert 2 * total.value == pytest.approx(1.0, abs=1e-5)
    for u in (0.1, 0.5, 0.85):
        margin = integrate(lambda v: c(np.full_like(v, u), v), 0.0, 1.0, atol=1e-9)
        assert margin.value == pytest.approx(1.0, abs=1e-5)


def test_cbar_hint_free_diagonal_matches():
    ref = cbar_density(power_diagonal(2.0))
    raw = cbar_density(DiagonalSection(lambda t: t**2))
    u = np.array([0.05, 0.3, 0.6])
    v = np.array([0.5, 0.4, 0.95])
    np.testing.assert_allclose(raw(u, v), ref(u, v), rtol=1e-6)


def two_block_diagonal():
    return DiagonalSection(lambda t: np.where(t < 0.5, 2 * t**2, 0.5 + 2 * (t - 0.5) ** 2))


def test_cbar_wrong_branch():
    with pytest.raises(WrongBranch):
        cbar_density(two_block_diagonal())


def test_general_single_interval_is_cbar():
    d = power_diagonal(1.8)
    rng = np.random.default_rng(2)
    u, v = rng.uniform(size=(2, 100))
    np.testing.assert_allclose(c_density_general(d)(u, v), cbar_density(d)(u, v), rtol=1e-15)


def test_general_comonotone_vanishes():
    c = c_density_general(comonotone_diagonal())
    u = np.linspace(0, 1, 11)
    assert np.all(c(u, u[::-1]) == 0.0)


def test_general_two_blocks():
    d = two_block_diagonal()
    np.testing.assert_allclose(d.intervals, [(0.0, 0.5), (0.5, 1.0)], atol=1e-12)
    c = c_density_general(d)
    assert c(0.2, 0.7) == 0.0
    base = cbar_density(power_diagonal(2.0))
    # each block is the square-diagonal density rescaled to side 1/2
    for u, v in [(0.1, 0.3), (0.6, 0.9)]:
        a = 0.0 if u < 0.5 else 0.5
        expect = 2 * base((u - a) * 2, (v - a) * 2)
        assert c(u, v) == pytest.approx(expect, rel=1e-6)


# joint density ---------------------------------------------------------------

def test_example_density_point(example_maxent):
    assert example_maxent(0.5, 0.25) == pytest.approx(1 / 0.5625, rel=1e-12)
    assert example_maxent(0.25, 0.5) == 0.0


def test_example_density_copula_route(example_maxent):
    x = np.linspace(0.02, 0.98, 25)
    a, b = np.meshgrid(x, x)
    m = a >= b
    np.testing.assert_allclose(example_maxent.density_via_copula(a[m], b[m]),
                               example_density(a[m], b[m]), rtol=1e-7)


def test_independent_v_density(indep_v_pairs):
    for pair in indep_v_pairs:
        dens = maxent_joint_density(pair)
        lo, hi = pair.bounds
        x = lo + (hi - lo) * np.linspace(0.05, 0.95, 15)
        a, b = np.meshgrid(x, x)
        m = a >= b
        g = pair.f1.pdf(x) / (2 * np.sqrt(pair.f1.cdf(x)))
        ga, gb = np.meshgrid(g, g)
        np.testing.assert_allclose(dens(a[m], b[m]), 2 * ga[m] * gb[m], rtol=1e-8)


def test_identical_no_maxent(identical_pair):
    with pytest.raises(NoMaxEnt):
        maxent_joint_density(identical_pair)


def test_exponential_density_normalized(exp_pair):
    dens = maxent_joint_density(exp_pair)
    lo, hi = exp_pair.bounds
    total = integrate_triangle(dens, lo, hi, atol=1e-10, outer_atol=1e-9)
    assert total.value == pytest.approx(1.0, abs=1e-6)
    x = 0.8
    m1 = integrate(lambda s: dens(np.full_like(s, x), s), lo, x, atol=1e-11)
    assert m1.value == pytest.approx(exp_pair.f1.pdf(x), abs=1e-6)
    m2 = integrate(lambda s: dens(s, np.full_like(s, x)), x, hi, atol=1e-11)
    assert m2.value == pytest.approx(exp_pair.f2.pdf(x), abs=1e-6)


# entropy ---------------------------------------------------------------------

def test_entropy_uniform_triangle():
    rep = differential_entropy(lambda a, b: np.full_like(a, 2.0), (0.0, 1.0))
    assert rep.shannon == pytest.approx(-np.log(2.0), abs=1e-10)
    assert rep.decomposition is None


def test_entropy_requires_bounds_for_functions():
    with pytest.raises(Unsupported):
        differential_entropy(lambda a, b: a)


def test_entropy_example_routes(example_maxent):
    rep = differential_entropy(example_maxent)
    exact = -0.5 - np.log(2.0)
    assert abs(rep.shannon - exact) < 1e-6
    assert abs(rep.decomposition - exact) < 1e-6
    assert abs(rep.shannon - rep.decomposition) < 1e-5


def test_entropy_drops_toward_comonotone():
    def band(w):
        def f(x1, x2):
            d = x1 - x2
            return np.where(d >= 0, np.exp(-d / w) / w / -np.expm1(-(1 - x2) / w), 0.0)
        return f

    values = [differential_entropy(band(w), (0.0, 1.0)).shannon for w in (0.1, 0.01, 0.001)]
    assert values[0] > values[1] > values[2]
    # a width-w exponential band has entropy close to 1 + log w
    assert values[2] == pytest.approx(1 + np.log(0.001), abs=0.05)


def _bump(u, freq):
    u = np.asarray(u, dtype=float)
    return np.where(u <= 0.5, np.sin(freq * np.pi * u) * np.sin(2 * np.pi * u) ** 2, 0.0)


def _perturbed(pair, dens, eps, freq):
    """Density of a compatible copula: ``c_D + eps p`` where ``p`` is symmetric,
    has zero row sums and zero mass on every square ``[0, t]^2``."""
    def f(x1, x2):
        u, v = pair.G(x1), pair.G(x2)
        p = _bump(u, freq) * _bump(v - 0.5, freq) + _bump(u - 0.5, freq) * _bump(v, freq)
        return dens(x1, x2) + 2 * eps * p * pair.g.pdf(x1) * pair.g.pdf(x2)
    return f


@pytest.mark.parametrize("eps,freq", [(0.05, 4), (0.1, 4), (0.2, 4), (0.05, 8), (0.1, 8)])
def test_maxent_beats_alternatives(power_pair, example_maxent, eps, freq):
    f = _perturbed(power_pair, example_maxent, eps, freq)
    x = np.linspace(0.0005, 0.9995, 300)
    a, b = np.meshgrid(x, x)
    m = a >= b
    assert f(a[m], b[m]).min() >= 0.0
    best = -0.5 - np.log(2.0)
    alt = differential_entropy(f, (0.0, 1.0)).shannon
    assert alt < best - 1e-9
