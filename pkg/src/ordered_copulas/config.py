"""JSON specifications for marginals, diagonals and copulas."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .copula import (
    Copula,
    DiagonalSection,
    archimedean_copula,
    bertino,
    comonotone_diagonal,
    diagonal_from_marginals,
    extend_diagonal,
    fh_lower,
    fh_upper,
    gumbel_diagonal,
    gumbel_generator,
    independence,
    marginals_from_diagonal,
    power_diagonal,
    table_diagonal,
)
from .distcore import (
    Cdf,
    Discrete,
    Empirical,
    Exponential,
    Normal,
    OrderedMarginalPair,
    Power,
    TruncatedNormal,
    Uniform,
    independent_v_partner,
)
from .errors import InvalidInput


class ConfigError(InvalidInput):
    code = "config-error"


def _num(obj: dict, key: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"missing field {key!r} in {obj}")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"field {key!r} must be a number")
    return float(val)


def _list(obj: dict, key: str) -> list[float]:
    val = obj.get(key)
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                            for v in val):
        raise ConfigError(f"field {key!r} must be a list of numbers")
    return [float(v) for v in val]


def _type(obj) -> str:
    if not isinstance(obj, dict) or not isinstance(obj.get("type"), str):
        raise ConfigError(f"expected an object with a string 'type', got {obj!r}")
    return obj["type"]


def parse_cdf(obj, base_dir: Path | None = None) -> Cdf:
    kind = _type(obj)
    try:
        if kind == "uniform":
            return Uniform(_num(obj, "a", 0.0), _num(obj, "b", 1.0))
        if kind == "power":
            return Power(_num(obj, "alpha"))
        if kind == "normal":
            return Normal(_num(obj, "mu", 0.0), _num(obj, "sigma", 1.0))
        if kind == "truncnormal":
            return TruncatedNormal(_num(obj, "mu", 0.0), _num(obj, "sigma", 1.0),
                                   _num(obj, "a"), _num(obj, "b"))
        if kind == "exponential":
            return Exponential(_num(obj, "rate"))
        if kind == "discrete":
            return Discrete(_list(obj, "atoms"), _list(obj, "masses"))
        if kind == "empirical":
            name = obj.get("file")
            if not isinstance(name, str):
                raise ConfigError("empirical needs a 'file' path")
            path = Path(name)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            try:
                return Empirical.from_file(path)
            except OSError as exc:
                raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
            except ValueError as exc:
                raise ConfigError(f"bad number in {path}: {exc}") from exc
        if kind == "independent_v":
            return independent_v_partner(parse_cdf(obj.get("base"), base_dir))
        if kind == "from_diagonal":
            return marginals_from_diagonal(parse_diagonal(obj.get("diagonal")))[1]
    except ConfigError:
        raise
    except InvalidInput as exc:
        raise ConfigError(f"bad {kind} parameters: {exc}") from exc
    raise ConfigError(f"unknown distribution type {kind!r}")


def parse_diagonal(obj) -> DiagonalSection:
    kind = _type(obj)
    if kind == "comonotone":
        return comonotone_diagonal()
    if kind == "power":
        return power_diagonal(_num(obj, "exponent"))
    if kind == "gumbel":
        theta = _num(obj, "theta")
        if theta < 1.0:
            raise ConfigError("gumbel needs theta >= 1")
        return gumbel_diagonal(theta)
    if kind == "table":
        try:
            return table_diagonal(_list(obj, "t"), _list(obj, "delta"))
        except ConfigError:
            raise
        except InvalidInput as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown diagonal type {kind!r}")


def parse_copula(obj, pair: OrderedMarginalPair | None = None) -> Copula:
    kind = _type(obj)
    if kind == "fh_upper":
        return fh_upper()
    if kind == "fh_lower":
        return fh_lower()
    if kind == "independence":
        return independence()
    if kind == "gumbel":
        theta = _num(obj, "theta")
        if theta < 1.0:
            raise ConfigError("gumbel needs theta >= 1")
        return archimedean_copula(gumbel_generator(theta))
    if kind == "bertino":
        if "diagonal" in obj:
            return bertino(parse_diagonal(obj["diagonal"]))
        if pair is None:
            raise ConfigError("bertino without a diagonal needs the marginals")
        return bertino(extend_diagonal(diagonal_from_marginals(pair)))
    raise ConfigError(f"unknown copula type {kind!r}")


@dataclass(frozen=True)
class Config:
    f1: Cdf
    f2: Cdf
    ctilde: dict | None
    diagonal: dict | None
    path: str


def load_config(path) -> Config:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict) or "F1" not in raw or "F2" not in raw:
        raise ConfigError("config must be an object with 'F1' and 'F2'")
    base = path.parent
    f1 = parse_cdf(raw["F1"], base)
    f2 = parse_cdf(raw["F2"], base)
    ctilde = raw.get("ctilde")
    diagonal = raw.get("diagonal")
    if ctilde is not None:
        _type(ctilde)
    if diagonal is not None:
        parse_diagonal(diagonal)
    return Config(f1, f2, ctilde, diagonal, str(path))
