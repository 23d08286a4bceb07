import numpy as np
import pytest

from ordered_copulas import (
    Exponential,
    Normal,
    Power,
    Transformed,
    TruncatedNormal,
    Uniform,
    independent_v_partner,
    make_ordered_pair,
)


def wavy_phi(u):
    u = np.asarray(u, dtype=float)
    return u - 0.05 * np.sin(np.pi * u) ** 2 * (1.0 - 0.6 * np.cos(4.0 * np.pi * u))


@pytest.fixture(scope="session")
def power_pair():
    """F1(x) = x**2 above F2(x) = x on [0, 1]."""
    return make_ordered_pair(Power(2.0), Uniform(0.0, 1.0))


@pytest.fixture(scope="session")
def disjoint_pair():
    return make_ordered_pair(Uniform(1.0, 2.0), Uniform(0.0, 1.0))


@pytest.fixture(scope="session")
def identical_pair():
    return make_ordered_pair(Normal(0.0, 1.0), Normal(0.0, 1.0))


@pytest.fixture(scope="session")
def exp_pair():
    return make_ordered_pair(Exponential(1.0), Exponential(2.0))


@pytest.fixture(scope="session")
def normal_pair():
    return make_ordered_pair(Normal(1.0, 1.0), Normal(0.0, 1.0))


@pytest.fixture(scope="session")
def wavy_pair():
    """Gap function with several local extrema, so H is not unimodal."""
    return make_ordered_pair(Transformed(Uniform(0.0, 1.0), wavy_phi), Uniform(0.0, 1.0))


@pytest.fixture(scope="session")
def indep_v_pairs():
    bases = [Uniform(0.0, 1.0), Power(2.0), TruncatedNormal(0.0, 1.0, -1.0, 2.0)]
    return [make_ordered_pair(b, independent_v_partner(b)) for b in bases]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
