"""Samplers for ordered joint laws and the order-statistics representation.

Every sampler returns pairs with ``x1 >= x2`` exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dependence import _strict_profile
from .distcore import Cdf, Discrete, OrderedMarginalPair
from .errors import InvalidInput, Unsupported
from .maxent import MaxEntDensity, maxent_joint_density
from .quadrature import bisect_increasing


class RngStream:
    """Seeded counter-based generator (Philox) that can be split into
    independent child streams."""

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            if int(seed) < 0 or int(seed) >= 2**64:
                raise InvalidInput("seed must be a 64-bit unsigned integer")
            self._seq = np.random.SeedSequence(int(seed))
        self._gen = np.random.Generator(np.random.Philox(self._seq))

    @property
    def seed(self):
        return self._seq.entropy

    def split(self, k: int) -> list["RngStream"]:
        return [RngStream(s) for s in self._seq.spawn(k)]

    def uniform(self, n: int) -> np.ndarray:
        """Uniforms on the open interval ``(0, 1)``."""
        return self._gen.random(n) + 2.0 ** -54

    def integers(self, high: int, n: int) -> np.ndarray:
        return self._gen.integers(0, high, n)


@dataclass(frozen=True)
class SamplePairs:
    x1: np.ndarray
    x2: np.ndarray
    law: str = "sample"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x1.shape != self.x2.shape:
            raise InvalidInput("columns must have equal length")

    @property
    def n(self) -> int:
        return int(self.x1.size)

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.x1, self.x2])

    @property
    def ordered(self) -> bool:
        return bool(np.all(self.x1 >= self.x2))


def _check_n(n: int):
    if int(n) < 1:
        raise InvalidInput("n must be positive")
    return int(n)


def sample_comonotone(pair: OrderedMarginalPair, rng: RngStream, n: int) -> SamplePairs:
    """``X1 = F1^-(U)``, ``X2 = F2^-(U)`` from one uniform per draw."""
    u = rng.uniform(_check_n(n))
    x1 = np.asarray(pair.f1.quantile(u), dtype=float)
    x2 = np.asarray(pair.f2.quantile(u), dtype=float)
    # F1 <= F2 forces F1^- >= F2^-; only numeric quantiles can blur this
    return SamplePairs(x1, np.minimum(x2, x1), "comonotone")


def _sampling_range(pair: OrderedMarginalPair) -> tuple[float, float]:
    return pair.bounds


def l_unimodal_point(pair: OrderedMarginalPair, u) -> tuple[np.ndarray, np.ndarray]:
    """Map ``u in (0, 1)`` to a point of ``L`` for unimodal ``H`` with mode ``r``.

    ``u <= F1(r)`` gives the diagonal point ``F1^-(u)``; ``u >= F2(r)`` the
    diagonal point ``F2^-(u)``; in between, ``w = u - F1(r)`` selects the
    off-diagonal point ``(s, t)`` with ``H(s) = H(t) = H(r) - w`` and
    ``t <= r <= s``.
    """
    info = _strict_profile(pair, "the L sampler")
    if not pair.common_support:
        raise Unsupported("the L sampler needs a common support interval")
    r = info.r
    u = np.atleast_1d(np.asarray(u, dtype=float))
    a = float(pair.f1.cdf(r))
    hr = float(pair.H(r))
    b = a + hr
    x1 = np.empty_like(u)
    x2 = np.empty_like(u)

    low = u <= a
    x1[low] = pair.f1.quantile(u[low])
    x2[low] = x1[low]
    high = u >= b
    x1[high] = pair.f2.quantile(u[high])
    x2[high] = x1[high]

    mid = ~(low | high)
    if np.any(mid):
        level = hr - (u[mid] - a)
        lo, hi = _sampling_range(pair)
        s = bisect_increasing(lambda z, i: -pair.H(z), -level,
                              np.full_like(level, r), np.full_like(level, max(hi, r)))
        t = bisect_increasing(lambda z, i: pair.H(z), level,
                              np.full_like(level, min(lo, r)), np.full_like(level, r))
        x1[mid] = np.maximum(s, r)
        x2[mid] = np.minimum(t, r)
    return x1, x2


def sample_L_unimodal(pair: OrderedMarginalPair, rng: RngStream, n: int) -> SamplePairs:
    """Exact sampler for the minimal law ``L`` when ``H`` is strictly unimodal.

    One stream picks the piece (masses ``F1(r)``, ``H(r)``, ``1 - F2(r)``),
    a second draws the position inside it.
    """
    n = _check_n(n)
    info = _strict_profile(pair, "the L sampler")
    r = info.r
    a = float(pair.f1.cdf(r))
    b = float(pair.f2.cdf(r))
    edges = np.array([0.0, a, b, 1.0])
    pick, place = rng.split(2)
    piece = np.searchsorted(np.cumsum(np.diff(edges))[:-1], pick.uniform(n), side="right")
    v = place.uniform(n)
    u = edges[piece] + v * (edges[piece + 1] - edges[piece])
    x1, x2 = l_unimodal_point(pair, u)
    return SamplePairs(x1, x2, "L", {"piece_masses": (a, b - a, 1.0 - b)})


def sample_maxent(pair_or_density, rng: RngStream, n: int) -> SamplePairs:
    """Sampler for the maximum-entropy joint law.

    ``X2 = F2^-(U)``.  Given ``X2 = x2`` in a block of ``H > 0``,
    ``P(X1 > x1 | x2) = R(x1) / R(x2)`` with ``R = sqrt(H) exp(-Psi)`` and
    ``Psi' = g / H``; ``X1`` solves ``log R(X1) = log V + log R(x2)`` by
    bisection on the block.
    """
    n = _check_n(n)
    dens = pair_or_density if isinstance(pair_or_density, MaxEntDensity) \
        else maxent_joint_density(pair_or_density)
    pair = dens.pair
    su, sv = rng.split(2)
    u, v = su.uniform(n), sv.uniform(n)
    x2 = np.asarray(pair.f2.quantile(u), dtype=float)
    x1 = x2.copy()
    blk = dens.block_of(dens._clip(x2))
    tlo, thi = pair.bounds
    for j, (a, b) in enumerate(dens.blocks):
        m = np.nonzero(blk == j)[0]
        if m.size == 0:
            continue
        start = x2[m]
        target = dens.log_R(start, j) + np.log(v[m])
        top = np.full(m.size, min(b, thi))
        top = np.maximum(top, start)
        sol = bisect_increasing(lambda z, i: -dens.log_R(z, j), -target, start, top,
                                xtol=1e-13 * max(1.0, abs(thi)))
        x1[m] = np.maximum(sol, start)
    return SamplePairs(x1, x2, "maxent")


def exchangeable_pair(samples: SamplePairs, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Randomly permute each pair; the result ``(V1, V2)`` is exchangeable."""
    flip = rng.integers(2, samples.n).astype(bool)
    v1 = np.where(flip, samples.x2, samples.x1)
    v2 = np.where(flip, samples.x1, samples.x2)
    return v1, v2


def multivariate_minlevel_prob(cdfs: list[Cdf], j: int, x) -> np.ndarray | float:
    """``P(V_1 <= x, ..., V_j <= x)`` for the exchangeable vector whose order
    statistics have marginals ``F_1 <= ... <= F_n``::

        (1 / C(n, j)) * sum_{l=1}^{n-j+1} C(n-l, j-1) F_l(x)
    """
    n = len(cdfs)
    if not (1 <= int(j) <= n) or int(j) != j:
        raise InvalidInput(f"j must be an integer in [1, {n}]")
    j = int(j)
    x = np.asarray(x, dtype=float)
    total = sum(math.comb(n - l, j - 1) * cdfs[l - 1].cdf(x) for l in range(1, n - j + 2))
    out = total / math.comb(n, j)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class OrderStatisticsReport:
    ok: bool
    max_deviation: float
    exact: bool
    joint_pmf: dict
    counterexample: str | None = None

    def prob(self, *values) -> Fraction:
        return self.joint_pmf.get(tuple(values), Fraction(0))


def _fraction_cdf(F: Discrete):
    atoms = [float(a) for a in F.atoms]
    # decimal-exact rationals, so masses like 0.2 become 1/5
    masses = [Fraction(repr(float(m))) for m in F.masses]
    cum = list(itertools.accumulate(masses))
    cum[-1] = Fraction(1)
    return atoms, cum


def _frac_eval(atoms, cum, x) -> Fraction:
    k = int(np.searchsorted(atoms, x, side="right"))
    return Fraction(0) if k == 0 else cum[k - 1]


def _frac_quantile(atoms, cum, u: Fraction) -> float:
    for a, c in zip(atoms, cum):
        if c >= u:
            return a
    return atoms[-1]


def verify_order_statistics_representation(cdfs: list[Discrete]) -> OrderStatisticsReport:
    """Check the order-statistics representation by brute force in rationals.

    Builds the comonotone coupling of ``F_1 <= ... <= F_n``, symmetrizes it
    over all permutations, then checks: the level formula of
    :func:`multivariate_minlevel_prob`, the marginals of the order
    statistics, and the inclusion-exclusion inversion
    ``P(V_(i) <= x) = sum_j (-1)^(j-(n-i+1)) C(j-1, n-i) C(n, j) P(V_1..V_j <= x)``.
    """
    n = len(cdfs)
    if not 1 <= n <= 4:
        raise InvalidInput("brute force supports 1 <= n <= 4")
    for F in cdfs:
        if not isinstance(F, Discrete) or F.atoms.size > 6:
            raise InvalidInput("each marginal must be discrete with at most 6 atoms")
    tabs = [_fraction_cdf(F) for F in cdfs]
    grid = sorted(set().union(*[t[0] for t in tabs]))

    for i in range(n - 1):
        for x in grid:
            if _frac_eval(*tabs[i], x) > _frac_eval(*tabs[i + 1], x):
                msg = f"F{i + 1}({x:g}) > F{i + 2}({x:g}): marginals are not ordered"
                return OrderStatisticsReport(False, float("inf"), False, {}, msg)

    # comonotone coupling: X_i = F_i^-(U)
    levels = sorted(set(itertools.chain.from_iterable(t[1] for t in tabs)) | {Fraction(0)})
    joint: dict[tuple, Fraction] = {}
    for lo, hi in zip(levels[:-1], levels[1:]):
        if hi == lo:
            continue
        tup = tuple(_frac_quantile(*t, hi) for t in tabs)
        joint[tup] = joint.get(tup, Fraction(0)) + (hi - lo)
    for tup in joint:
        if any(tup[i] < tup[i + 1] for i in range(n - 1)):
            return OrderStatisticsReport(False, float("inf"), False, joint,
                                         f"coupling not ordered at {tup}")

    perms = list(itertools.permutations(range(n)))
    v_law: dict[tuple, Fraction] = {}
    for tup, p in joint.items():
        share = p / len(perms)
        for s in perms:
            key = tuple(tup[k] for k in s)
            v_law[key] = v_law.get(key, Fraction(0)) + share

    def level_prob(j, x):
        return sum((p for v, p in v_law.items() if all(c <= x for c in v[:j])), Fraction(0))

    dev = Fraction(0)
    for x in grid:
        F_at = [_frac_eval(*t, x) for t in tabs]
        levels_x = {}
        for j in range(1, n + 1):
            formula = sum(math.comb(n - l, j - 1) * F_at[l - 1] for l in range(1, n - j + 2))
            formula /= math.comb(n, j)
            levels_x[j] = level_prob(j, x)
            dev = max(dev, abs(levels_x[j] - formula))
        for i in range(1, n + 1):
            direct = sum((p for v, p in v_law.items() if sorted(v, reverse=True)[i - 1] <= x),
                         Fraction(0))
            inv = sum(((-1) ** (j - (n - i + 1)) * math.comb(j - 1, n - i) * math.comb(n, j)
                       * levels_x[j]) for j in range(n - i + 1, n + 1))
            dev = max(dev, abs(direct - F_at[i - 1]), abs(inv - F_at[i - 1]))
    return OrderStatisticsReport(float(dev) < 1e-12, float(dev), dev == 0, joint)
