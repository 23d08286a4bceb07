import numpy as np
import pytest

from ordered_copulas import (
    Discrete,
    Empirical,
    Exponential,
    Normal,
    Power,
    TruncatedNormal,
    Uniform,
    make_ordered_pair,
)
from ordered_copulas.config import (
    ConfigError,
    load_config,
    parse_cdf,
    parse_copula,
    parse_diagonal,
)


@pytest.mark.parametrize("spec,cls", [
    ({"type": "uniform", "a": 0, "b": 1}, Uniform),
    ({"type": "power", "alpha": 0.5}, Power),
    ({"type": "normal", "mu": 0, "sigma": 1}, Normal),
    ({"type": "truncnormal", "a": -1, "b": 2}, TruncatedNormal),
    ({"type": "exponential", "rate": 2}, Exponential),
    ({"type": "discrete", "atoms": [0, 1], "masses": [0.2, 0.8]}, Discrete),
])
def test_parse_cdf_kinds(spec, cls):
    assert isinstance(parse_cdf(spec), cls)


def test_parse_empirical(tmp_path):
    (tmp_path / "d.txt").write_text("0.5\n# note\n0.25\n")
    F = parse_cdf({"type": "empirical", "file": "d.txt"}, tmp_path)
    assert isinstance(F, Empirical) and F.cdf(0.3) == pytest.approx(0.5)


def test_parse_independent_v():
    F2 = parse_cdf({"type": "independent_v", "base": {"type": "uniform"}})
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(F2.cdf(x), 2 * np.sqrt(x) - x, atol=1e-12)


@pytest.mark.parametrize("spec", [
    {"type": "exponential", "rate": -1},
    {"type": "power", "alpha": "two"},
    {"type": "discrete", "atoms": [0, 1], "masses": [0.5, 0.6]},
    {"type": "empirical"},
    {"no_type": 1},
    [1, 2],
])
def test_parse_cdf_errors(spec):
    with pytest.raises(ConfigError):
        parse_cdf(spec)


def test_parse_diagonals():
    t = np.linspace(0, 1, 11)
    np.testing.assert_allclose(parse_diagonal({"type": "comonotone"})(t), t)
    np.testing.assert_allclose(parse_diagonal({"type": "power", "exponent": 2})(t), t**2)
    np.testing.assert_allclose(parse_diagonal({"type": "gumbel", "theta": 2})(t),
                               t ** np.sqrt(2), atol=1e-14)
    d = parse_diagonal({"type": "table", "t": [0, 0.5, 1], "delta": [0, 0.25, 1]})
    assert d(0.25) == pytest.approx(0.125)
    with pytest.raises(ConfigError):
        parse_diagonal({"type": "table", "t": [0, 0], "delta": [0, 1]})
    with pytest.raises(ConfigError):
        parse_diagonal({"type": "gumbel", "theta": 0.5})


def test_parse_copulas():
    pair = make_ordered_pair(Power(2.0), Uniform(0.0, 1.0))
    for kind in ("fh_upper", "fh_lower", "independence"):
        assert parse_copula({"type": kind}).family == kind
    assert parse_copula({"type": "gumbel", "theta": 2}).family.startswith("archimedean")
    B = parse_copula({"type": "bertino"}, pair)
    assert B(0.375, 0.375) == pytest.approx(0.25)
    with pytest.raises(ConfigError):
        parse_copula({"type": "bertino"})
    with pytest.raises(ConfigError):
        parse_copula({"type": "gaussian"})


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"F1": {"type": "power", "alpha": 2}, "F2": {"type": "uniform"},'
                    ' "diagonal": {"type": "power", "exponent": 3}}')
    cfg = load_config(path)
    assert isinstance(cfg.f1, Power) and cfg.diagonal["exponent"] == 3
    path.write_text('{"F1": {"type": "uniform"}, "F2": {"type": "uniform"},'
                    ' "diagonal": {"type": "spiral"}}')
    with pytest.raises(ConfigError):
        load_config(path)
