"""One-dimensional distribution machinery.

Cdf families, generalized inverses, the ordered marginal pair with its
mixture cdf ``G = (F1 + F2)/2`` and gap function ``H = F2 - F1``,
dominance checking and unimodality analysis of ``H``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import special

from .errors import InvalidInput, NotStochasticallyOrdered, Unsupported
from .quadrature import bisect_increasing, golden_min

TRUNCATION_EPS = 1e-10
PROB_SLACK = 1e-12
DOMINANCE_GRID = 10_001
DOMINANCE_TOL = 1e-12
UNIMODAL_GRID = 10_001
MODE_TOL = 1e-10
# changes of H smaller than this are treated as flat
_FLAT_TOL = 1e-14


def clamp_prob(p):
    return np.clip(p, 0.0, 1.0)


class Cdf(ABC):
    """A univariate distribution function.

    Subclasses implement ``cdf``, ``quantile`` and the support bounds.  All
    evaluations are vectorized and follow the conventions ``F(-inf) = 0``
    and ``F(+inf) = 1``.
    """

    kind: str = "cdf"

    @property
    @abstractmethod
    def lo(self) -> float: ...

    @property
    @abstractmethod
    def hi(self) -> float: ...

    @abstractmethod
    def cdf(self, x): ...

    def cdf_left(self, x):
        """``P(X < x)``; equals ``cdf`` for atomless laws."""
        return self.cdf(x)

    def sf(self, x):
        """``P(X > x)``; families override it to keep precision in the upper tail."""
        return 1.0 - self.cdf(x)

    @abstractmethod
    def _quantile(self, t): ...

    def quantile(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._quantile(np.clip(t, 0.0, 1.0)), dtype=float)
        return np.where(t <= 0.0, -np.inf, out)

    def pdf(self, x):
        raise Unsupported(f"{self.kind} has no density")

    @property
    def atoms(self) -> np.ndarray:
        return np.empty(0)

    @property
    def is_continuous(self) -> bool:
        return self.atoms.size == 0

    @property
    def has_density(self) -> bool:
        return False

    def truncated_support(self, eps: float = TRUNCATION_EPS) -> tuple[float, float]:
        lo = self.lo if math.isfinite(self.lo) else float(self.quantile(eps))
        hi = self.hi if math.isfinite(self.hi) else float(self.quantile(1.0 - eps))
        return lo, hi

    def __call__(self, x):
        return self.cdf(x)


@dataclass(frozen=True)
class Uniform(Cdf):
    a: float = 0.0
    b: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidInput("uniform needs a < b")

    @property
    def lo(self):
        return self.a

    @property
    def hi(self):
        return self.b

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def sf(self, x):
        return np.clip((self.b - np.asarray(x, dtype=float)) / (self.b - self.a), 0.0, 1.0)

    def _quantile(self, t):
        return self.a + t * (self.b - self.a)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    @property
    def has_density(self):
        return True


@dataclass(frozen=True)
class Power(Cdf):
    """``F(x) = x**alpha`` on ``[0, 1]``."""

    alpha: float = 1.0
    kind = "power"

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidInput("power needs alpha > 0")

    @property
    def lo(self):
        return 0.0

    @property
    def hi(self):
        return 1.0

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** self.alpha

    def sf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            return np.where(x > 0.0, -np.expm1(self.alpha * np.log(x)), 1.0)

    def _quantile(self, t):
        return t ** (1.0 / self.alpha)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = self.alpha * np.where(inside, x, 1.0) ** (self.alpha - 1.0)
        return np.where(inside, d, 0.0)

    @property
    def has_density(self):
        return True


@dataclass(frozen=True)
class Normal(Cdf):
    mu: float = 0.0
    sigma: float = 1.0
    kind = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidInput("normal needs sigma > 0")

    @property
    def lo(self):
        return -math.inf

    @property
    def hi(self):
        return math.inf

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def sf(self, x):
        return special.ndtr((self.mu - np.asarray(x, dtype=float)) / self.sigma)

    def _quantile(self, t):
        return self.mu + self.sigma * special.ndtri(t)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    @property
    def has_density(self):
        return True


@dataclass(frozen=True)
class TruncatedNormal(Cdf):
    mu: float = 0.0
    sigma: float = 1.0
    a: float = -1.0
    b: float = 1.0
    kind = "truncnormal"

    def __post_init__(self):
        if not (self.sigma > 0 and self.a < self.b):
            raise InvalidInput("truncnormal needs sigma > 0 and a < b")

    @property
    def lo(self):
        return self.a

    @property
    def hi(self):
        return self.b

    @cached_property
    def _ends(self):
        return (special.ndtr((self.a - self.mu) / self.sigma),
                special.ndtr((self.b - self.mu) / self.sigma))

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        pa, pb = self._ends
        return np.clip((special.ndtr((x - self.mu) / self.sigma) - pa) / (pb - pa), 0.0, 1.0)

    def sf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        pa, pb = self._ends
        top = special.ndtr((self.mu - self.b) / self.sigma)
        return np.clip((special.ndtr((self.mu - x) / self.sigma) - top) / (pb - pa), 0.0, 1.0)

    def _quantile(self, t):
        pa, pb = self._ends
        return np.clip(self.mu + self.sigma * special.ndtri(pa + t * (pb - pa)), self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        pa, pb = self._ends
        z = (x - self.mu) / self.sigma
        d = np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi) * (pb - pa))
        return np.where((x >= self.a) & (x <= self.b), d, 0.0)

    @property
    def has_density(self):
        return True


@dataclass(frozen=True)
class Exponential(Cdf):
    rate: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidInput("exponential needs rate > 0")

    @property
    def lo(self):
        return 0.0

    @property
    def hi(self):
        return math.inf

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0)

    def _quantile(self, t):
        with np.errstate(divide="ignore"):
            return -np.log1p(-t) / self.rate

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    @property
    def has_density(self):
        return True


class Discrete(Cdf):
    """Finitely many atoms with probabilities."""

    kind = "discrete"

    def __init__(self, atoms, masses):
        atoms = np.asarray(atoms, dtype=float).ravel()
        masses = np.asarray(masses, dtype=float).ravel()
        if atoms.size == 0 or atoms.size != masses.size:
            raise InvalidInput("discrete needs equally many atoms and masses")
        if not np.all(np.isfinite(atoms)):
            raise InvalidInput("atoms must be finite")
        if np.any(np.diff(atoms) <= 0):
            raise InvalidInput("atoms must be strictly increasing")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
            raise InvalidInput("masses must be nonnegative and sum to 1")
        keep = masses > 0
        self._atoms = atoms[keep]
        self.masses = masses[keep]
        cum = np.cumsum(self.masses)
        cum[-1] = 1.0
        self._cum = np.minimum(cum, 1.0)

    def __repr__(self):
        return f"{type(self).__name__}(atoms={self._atoms.tolist()}, masses={self.masses.tolist()})"

    def __eq__(self, other):
        return (type(other) is type(self) and np.array_equal(self._atoms, other._atoms)
                and np.array_equal(self.masses, other.masses))

    __hash__ = None

    @classmethod
    def from_sample(cls, sample) -> "Discrete":
        values, counts = np.unique(np.asarray(sample, dtype=float), return_counts=True)
        return cls(values, counts / counts.sum())

    @property
    def atoms(self):
        return self._atoms

    @property
    def lo(self):
        return float(self._atoms[0])

    @property
    def hi(self):
        return float(self._atoms[-1])

    def cdf(self, x):
        k = np.searchsorted(self._atoms, np.asarray(x, dtype=float), side="right")
        return np.where(k > 0, self._cum[np.maximum(k - 1, 0)], 0.0)

    def cdf_left(self, x):
        k = np.searchsorted(self._atoms, np.asarray(x, dtype=float), side="left")
        return np.where(k > 0, self._cum[np.maximum(k - 1, 0)], 0.0)

    def _quantile(self, t):
        k = np.searchsorted(self._cum, t, side="left")
        return self._atoms[np.minimum(k, self._atoms.size - 1)]


class Empirical(Discrete):
    """Empirical cdf of a sample: jumps of ``1/n`` at each value, ties merged."""

    kind = "empirical"

    def __init__(self, sample):
        values, counts = np.unique(np.asarray(sample, dtype=float), return_counts=True)
        if values.size == 0:
            raise InvalidInput("empty sample")
        super().__init__(values, counts / counts.sum())
        self.n = int(counts.sum())

    @classmethod
    def from_file(cls, path) -> "Empirical":
        values = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
        return cls(values)


def _numeric_quantile(F: Cdf, t) -> np.ndarray:
    """Generalized inverse by bracketed bisection, snapping onto atoms."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full(t.shape, np.nan)
    lo_s, hi_s = F.truncated_support(1e-12)
    width = max(hi_s - lo_s, 1.0)
    top = t >= 1.0
    if np.any(top):
        out[top] = F.hi if math.isfinite(F.hi) else math.inf
    work = (t > 0.0) & ~top
    if np.any(work):
        tw = t[work]
        lo = np.full(tw.shape, (F.lo - 1.0) if math.isfinite(F.lo) else lo_s)
        hi = np.full(tw.shape, hi_s)
        for _ in range(200):
            bad = F.cdf(lo) >= tw
            if not np.any(bad):
                break
            lo = np.where(bad, lo - width, lo)
            width *= 2.0
        width = max(hi_s - lo_s, 1.0)
        for _ in range(200):
            bad = F.cdf(hi) < tw
            if not np.any(bad):
                break
            hi = np.where(bad, hi + width, hi)
            width *= 2.0
        x = bisect_increasing(
            lambda z, i: F.cdf(z), tw, lo, hi,
            xtol=1e-15 * max(1.0, float(np.max(np.abs(hi))), float(np.max(np.abs(lo)))),
        )
        atoms = F.atoms
        if atoms.size:
            k = np.clip(np.searchsorted(atoms, x, side="left"), 0, atoms.size - 1)
            for cand in (atoms[k], atoms[np.maximum(k - 1, 0)]):
                snap = (np.abs(cand - x) <= 1e-9 * max(1.0, width)) & (F.cdf(cand) >= tw)
                x = np.where(snap, np.minimum(cand, x), x)
        out[work] = x
    return out


def _newton_quantile(F: "Mixture", t) -> np.ndarray:
    """Quantile of a mixture of continuous laws with densities.

    The answer lies between the component quantiles.  Newton steps are
    taken while they stay inside the bracket, bisection steps otherwise;
    a final bisection pins down the smallest solution when the density
    vanishes on a stretch.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full(t.shape, np.nan)
    top = t >= 1.0
    out[top] = F.hi if math.isfinite(F.hi) else math.inf
    out[t <= 0.0] = -math.inf
    work = (t > 0.0) & ~top
    if not np.any(work):
        return out
    tw = t[work]
    q = np.stack([np.asarray(F.first.quantile(tw), dtype=float),
                  np.asarray(F.second.quantile(tw), dtype=float)])
    lo = np.min(q, axis=0)
    hi = np.max(q, axis=0)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        out[work] = _numeric_quantile(F, tw)
        return out
    eps = np.finfo(float).eps
    scale = np.maximum(np.abs(lo), np.abs(hi)) + np.finfo(float).tiny
    lo = lo - 4.0 * eps * scale
    x = hi.copy()
    act = np.arange(tw.size)
    for _ in range(NEWTON_ITERS):
        if act.size == 0:
            break
        xa, ta = x[act], tw[act]
        ga = F.cdf(xa)
        above = ga >= ta
        hi[act] = np.where(above, np.minimum(xa, hi[act]), hi[act])
        lo[act] = np.where(above, lo[act], np.maximum(xa, lo[act]))
        dens = F.pdf(xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (ga - ta) / dens
        prop = xa - step
        ok = (dens > 0) & np.isfinite(prop) & (prop > lo[act]) & (prop < hi[act])
        small = np.abs(step) <= 4.0 * eps * scale[act]
        x[act] = np.where(small, xa, np.where(ok, prop, 0.5 * (lo[act] + hi[act])))
        closed = hi[act] - lo[act] <= 4.0 * eps * scale[act]
        act = act[~(((dens > 0) & small) | closed)]
    # smallest x with G(x) >= t inside the final bracket
    res = np.where(F.cdf(x) >= tw, x, hi)
    below = np.maximum(res - 8.0 * eps * scale, lo)
    flat = F.cdf(below) >= tw
    if np.any(flat):
        res[flat] = bisect_increasing(lambda z, i: F.cdf(z), tw[flat], lo[flat], res[flat])
    out[work] = res
    return out


NEWTON_ITERS = 100


@dataclass(frozen=True)
class Mixture(Cdf):
    """``w*first + (1-w)*second``."""

    w: float
    first: Cdf
    second: Cdf
    kind = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise InvalidInput("mixture weight must be in [0, 1]")

    @property
    def lo(self):
        return min(self.first.lo, self.second.lo)

    @property
    def hi(self):
        return max(self.first.hi, self.second.hi)

    def cdf(self, x):
        return clamp_prob(self.w * self.first.cdf(x) + (1.0 - self.w) * self.second.cdf(x))

    def sf(self, x):
        return clamp_prob(self.w * self.first.sf(x) + (1.0 - self.w) * self.second.sf(x))

    def cdf_left(self, x):
        return clamp_prob(self.w * self.first.cdf_left(x)
                          + (1.0 - self.w) * self.second.cdf_left(x))

    @cached_property
    def _as_discrete(self) -> Discrete | None:
        if isinstance(self.first, Discrete) and isinstance(self.second, Discrete):
            atoms = np.union1d(self.first.atoms, self.second.atoms)
            masses = self.cdf(atoms) - self.cdf_left(atoms)
            return Discrete(atoms, masses / masses.sum())
        return None

    def _quantile(self, t):
        if self._as_discrete is not None:
            return self._as_discrete.quantile(t)
        if self.has_density and self.is_continuous:
            return _newton_quantile(self, t).reshape(np.shape(t))
        return _numeric_quantile(self, t).reshape(np.shape(t))

    def truncated_support(self, eps=TRUNCATION_EPS):
        a1, b1 = self.first.truncated_support(eps)
        a2, b2 = self.second.truncated_support(eps)
        return min(a1, a2), max(b1, b2)

    def pdf(self, x):
        return self.w * self.first.pdf(x) + (1.0 - self.w) * self.second.pdf(x)

    @property
    def has_density(self):
        return self.first.has_density and self.second.has_density

    @property
    def atoms(self):
        return np.union1d(self.first.atoms, self.second.atoms)


@dataclass(frozen=True)
class Transformed(Cdf):
    """``F(x) = phi(base(x))`` for a continuous increasing ``phi`` onto ``[0, 1]``.

    ``phi_inv`` and ``phi_deriv`` are optional; without an inverse the
    quantile is found by bisection on ``[0, 1]``.
    """

    base: Cdf
    phi: Callable
    phi_inv: Callable | None = None
    phi_deriv: Callable | None = None
    name: str = "transformed"
    kind = "transformed"

    @property
    def lo(self):
        return self.base.lo

    @property
    def hi(self):
        return self.base.hi

    def cdf(self, x):
        return clamp_prob(self.phi(self.base.cdf(x)))

    def cdf_left(self, x):
        return clamp_prob(self.phi(self.base.cdf_left(x)))

    def _invert_phi(self, t):
        if self.phi_inv is not None:
            return clamp_prob(self.phi_inv(t))
        return bisect_increasing(lambda u, i: self.phi(u), t, 0.0, 1.0, xtol=1e-16)

    def _quantile(self, t):
        return self.base.quantile(self._invert_phi(t))

    def truncated_support(self, eps=TRUNCATION_EPS):
        return Cdf.truncated_support(self, eps)

    def pdf(self, x):
        if self.phi_deriv is None:
            raise Unsupported("transformed cdf without phi derivative has no density")
        u = self.base.cdf(x)
        with np.errstate(invalid="ignore"):
            d = self.phi_deriv(u) * self.base.pdf(x)
        return np.where(self.base.pdf(x) > 0, d, 0.0)

    @property
    def has_density(self):
        return self.phi_deriv is not None and self.base.has_density

    @property
    def atoms(self):
        return self.base.atoms


def independent_v_partner(base: Cdf) -> Transformed:
    """``2*sqrt(F) - F``: the larger order statistic's partner when the
    exchangeable pair has independent components."""
    return Transformed(
        base,
        phi=lambda u: 2.0 * np.sqrt(u) - u,
        phi_inv=lambda t: (1.0 - np.sqrt(np.maximum(1.0 - t, 0.0))) ** 2,
        phi_deriv=lambda u: np.where(u > 0, 1.0 / np.sqrt(np.where(u > 0, u, 1.0)) - 1.0, np.inf),
        name="independent_v",
    )


@dataclass(frozen=True)
class Image(Cdf):
    """Law of ``fwd(X)`` for a strictly increasing map ``fwd``."""

    base: Cdf
    fwd: Callable
    inv: Callable | None = None
    fwd_deriv: Callable | None = None
    kind = "image"

    @property
    def lo(self):
        return float(self.fwd(np.float64(self.base.lo)))

    @property
    def hi(self):
        return float(self.fwd(np.float64(self.base.hi)))

    def _pull(self, y):
        y = np.asarray(y, dtype=float)
        if self.inv is not None:
            return self.inv(y)
        lo, hi = self.base.truncated_support(1e-14)
        span = max(hi - lo, 1.0)
        a = np.full(y.shape, lo - span)
        b = np.full(y.shape, hi + span)
        for _ in range(100):
            m = self.fwd(a) > y
            if not np.any(m):
                break
            a = np.where(m, 2 * a - b, a)
        for _ in range(100):
            m = self.fwd(b) < y
            if not np.any(m):
                break
            b = np.where(m, 2 * b - a, b)
        fin = np.isfinite(y)
        res = bisect_increasing(lambda z, i: self.fwd(z), np.where(fin, y, 0.0), a, b,
                                xtol=1e-15 * span)
        return np.where(fin, res, y)

    def cdf(self, x):
        return self.base.cdf(self._pull(x))

    def cdf_left(self, x):
        return self.base.cdf_left(self._pull(x))

    def _quantile(self, t):
        q = self.base.quantile(t)
        with np.errstate(invalid="ignore", over="ignore"):
            return np.where(np.isfinite(q), self.fwd(np.where(np.isfinite(q), q, 0.0)), q)

    def pdf(self, x):
        if self.fwd_deriv is None:
            raise Unsupported("image cdf without derivative has no density")
        z = self._pull(x)
        return self.base.pdf(z) / self.fwd_deriv(z)

    @property
    def has_density(self):
        return self.fwd_deriv is not None and self.base.has_density

    @property
    def atoms(self):
        a = self.base.atoms
        return self.fwd(a) if a.size else a


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise InvalidInput("x must be a real number or +/-inf")
    return x


def eval_cdf(F: Cdf, x):
    """Evaluate ``F(x)``; ``x`` may be ``+/-inf`` but not NaN."""
    out = F.cdf(_check_x(x))
    return float(out) if np.ndim(out) == 0 else out


def quantile(F: Cdf, t):
    """Generalized inverse ``inf{x : F(x) >= t}`` with ``inf(empty) = +inf``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any((t < 0.0) | (t > 1.0)):
        raise InvalidInput("t must lie in [0, 1]")
    out = F.quantile(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class UnimodalProfile:
    is_unimodal: bool
    r: float | None
    strict: bool = False


@dataclass(frozen=True, eq=False)
class OrderedMarginalPair:
    """Marginals ``F1 <= F2`` (so ``X1`` is stochastically larger)."""

    f1: Cdf
    f2: Cdf
    g: Mixture
    grid_size: int = DOMINANCE_GRID
    unimodal_info: UnimodalProfile | None = field(default=None, compare=False)

    def G(self, x):
        return self.g.cdf(x)

    def H(self, x):
        # survival functions keep relative precision where both cdfs are near 1
        x = np.asarray(x, dtype=float)
        low = self.f2.cdf(x) - self.f1.cdf(x)
        high = self.f1.sf(x) - self.f2.sf(x)
        return np.maximum(np.where(self.g.cdf(x) > 0.5, high, low), 0.0)

    @property
    def h(self):
        return self.H

    @property
    def atoms(self) -> np.ndarray:
        return np.union1d(self.f1.atoms, self.f2.atoms)

    @property
    def is_continuous(self) -> bool:
        return self.f1.is_continuous and self.f2.is_continuous

    @property
    def has_density(self) -> bool:
        return self.f1.has_density and self.f2.has_density

    @property
    def common_support(self) -> bool:
        return self.f1.lo == self.f2.lo and self.f1.hi == self.f2.hi

    @cached_property
    def bounds(self) -> tuple[float, float]:
        """Truncated union support."""
        a1, b1 = self.f1.truncated_support()
        a2, b2 = self.f2.truncated_support()
        return min(a1, a2), max(b1, b2)

    def grid(self, n: int | None = None) -> np.ndarray:
        lo, hi = self.bounds
        x = np.linspace(lo, hi, n or self.grid_size)
        return np.union1d(x, self.atoms) if self.atoms.size else x

    @cached_property
    def identical(self) -> bool:
        return bool(np.max(self.H(self.grid())) <= DOMINANCE_TOL)


def make_ordered_pair(F1: Cdf, F2: Cdf, grid_size: int = DOMINANCE_GRID) -> OrderedMarginalPair:
    """Validate ``F1 <= F2`` on a grid over the union support plus all atoms.

    Raises
    ------
    NotStochasticallyOrdered
        With the worst violating point as ``witness``.
    """
    if grid_size < 2:
        raise InvalidInput("grid_size must be at least 2")
    pair = OrderedMarginalPair(F1, F2, Mixture(0.5, F1, F2), grid_size)
    x = pair.grid()
    gap = F1.cdf(x) - F2.cdf(x)
    k = int(np.argmax(gap))
    if gap[k] > DOMINANCE_TOL:
        raise NotStochasticallyOrdered(
            f"F1(x) > F2(x) at x={x[k]:.12g} (excess {gap[k]:.3g})", witness=float(x[k])
        )
    object.__setattr__(pair, "unimodal_info", unimodal_profile(pair))
    return pair


def unimodal_profile(pair: OrderedMarginalPair, grid_size: int = UNIMODAL_GRID) -> UnimodalProfile:
    """Decide whether ``H`` increases then decreases, and locate its mode ``r``.

    Flat maxima report the leftmost maximizer; ``H == 0`` reports the left
    end of the grid.
    """
    x = pair.grid(grid_size)
    h = pair.H(x)
    if h.max() <= _FLAT_TOL:
        return UnimodalProfile(True, float(x[0]), strict=False)
    d = np.diff(h)
    sig = np.where(np.abs(d) > _FLAT_TOL, np.sign(d), 0.0)
    nz = sig[sig != 0]
    if np.any(np.diff(nz) > 0):  # a decrease followed by an increase
        return UnimodalProfile(False, None)

    k = int(np.argmax(h))
    lo = x[max(k - 1, 0)]
    hi = x[min(k + 1, x.size - 1)]
    r = _refine_mode(pair, float(x[k]), float(lo), float(hi))

    live = np.maximum(h[:-1], h[1:]) > 1e-11
    left = x[1:] <= r
    right = x[:-1] >= r
    strict = bool(np.all(sig[live & left] > 0) and np.all(sig[live & right] < 0))
    return UnimodalProfile(True, r, strict=strict)


def _refine_mode(pair: OrderedMarginalPair, xk: float, lo: float, hi: float) -> float:
    if not pair.is_continuous:
        return xk
    if pair.has_density:
        def slope_down(z, i):
            return (pair.f2.pdf(z) - pair.f1.pdf(z) <= 0).astype(float)

        if slope_down(np.array([hi]), None)[0] == 1.0 and slope_down(np.array([lo]), None)[0] == 0.0:
            r = float(bisect_increasing(slope_down, 1.0, lo, hi, xtol=1e-14 * max(1.0, abs(xk))))
            if pair.H(r) >= pair.H(xk) - 1e-15:
                return r
    r, _ = golden_min(lambda z, i: -pair.H(z), [lo], [hi], tol=MODE_TOL)
    r = float(r[0])
    return r if pair.H(r) >= pair.H(xk) else xk


@dataclass(frozen=True)
class JointLaw:
    """A bivariate cdf on the plane."""

    cdf: Callable
    name: str = "joint"
    pair: OrderedMarginalPair | None = None

    def __call__(self, x1, x2):
        out = clamp_prob(self.cdf(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)))
        return float(out) if np.ndim(out) == 0 else out


def rectangle_mass(F, a1, b1, a2, b2):
    """Mass of ``(a1, b1] x (a2, b2]`` by inclusion-exclusion.

    Round-off negatives down to ``-1e-12`` are set to zero; anything more
    negative is returned unchanged so that violations of 2-increasingness
    stay visible.
    """
    a1, b1, a2, b2 = (np.asarray(v, dtype=float) for v in (a1, b1, a2, b2))
    if np.any(a1 > b1) or np.any(a2 > b2):
        raise InvalidInput("rectangle corners reversed")
    m = F(b1, b2) - F(a1, b2) - F(b1, a2) + F(a1, a2)
    m = np.where((m < 0) & (m >= -PROB_SLACK), 0.0, m)
    return float(m) if np.ndim(m) == 0 else m
