"""Diagonal sections, copula families and the ordered joint-law construction.

A joint law of ``X1 >= X2`` is built from a copula ``C~`` that is symmetric
on the range of ``G`` and whose diagonal reproduces ``F1`` through ``G``::

    F(x1, x2) = F1(x1)                               if x1 <= x2
              = 2 C~(G(x1), G(x2)) - F1(x2)          otherwise
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .distcore import (
    Cdf,
    JointLaw,
    OrderedMarginalPair,
    Transformed,
    Uniform,
    clamp_prob,
)
from .errors import IncompatibleCopula
from .quadrature import Potential, bisect_increasing, golden_min, integrate_many

DECOMPOSITION_GRID = 16_385
BERTINO_GRID = 2049
COMPAT_GRID = 4097
COMPAT_TOL = 1e-9
FD_STEP = 1e-6
_ZERO_GAP = 1e-13
_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class DiagonalSection:
    """A candidate diagonal section ``delta: [0, 1] -> [0, 1]``.

    Optional hints speed up downstream work:

    ``deriv``
        closed-form derivative.
    ``quasiconcave_gap`` / ``knots``
        ``t - delta(t)`` is quasiconcave between consecutive knots, so its
        infimum over an interval is attained at the ends or at a knot.
    ``gap_integral``
        ``(u, v) -> integral_u^v ds / (s - delta(s))``.
    ``inverse``
        closed-form right-continuous generalized inverse.
    """

    func: Callable
    deriv: Callable | None = None
    representation: str = "closed-form"
    quasiconcave_gap: bool = False
    knots: np.ndarray = field(default_factory=lambda: np.empty(0))
    gap_integral: Callable | None = None
    inverse: Callable | None = None
    name: str = "custom"

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return clamp_prob(self.func(t))

    def gap(self, t):
        t = np.asarray(t, dtype=float)
        return t - self(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.deriv is not None:
            return self.deriv(t)
        h = FD_STEP
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (self(hi) - self(lo)) / (hi - lo)

    def inverse_right(self, x):
        """``delta^-(x+) = inf{t : delta(t) > x}``, with value 1 at ``x >= 1``."""
        x = np.asarray(x, dtype=float)
        if self.inverse is not None:
            out = self.inverse(np.clip(x, 0.0, 1.0))
        else:
            out = bisect_increasing(
                lambda t, i: (self(t) > np.broadcast_to(x, np.shape(x)).ravel()[i]).astype(float),
                np.ones(np.shape(x)), 0.0, 1.0, xtol=1e-15,
            )
        out = np.where(x >= 1.0, 1.0, np.where(x < 0.0, 0.0, out))
        return out

    @cached_property
    def intervals(self) -> list[tuple[float, float]]:
        """Maximal open intervals on which ``delta(t) < t``."""
        return gap_intervals(self)

    @property
    def flat_intervals(self) -> list[tuple[float, float]]:
        return self.intervals

    @cached_property
    def _gap_potentials(self) -> list[tuple[float, float, Potential]]:
        def q(s):
            with np.errstate(divide="ignore"):
                return 1.0 / self.gap(s)

        return [(a, b, Potential(q, a, b)) for a, b in self.intervals]

    def integrate_gap(self, u, v):
        """``integral_u^v ds / (s - delta(s))`` for ``u <= v``; infinite when
        ``[u, v]`` leaves a single interval of ``{delta < id}``."""
        if self.gap_integral is not None:
            return self.gap_integral(u, v)
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        out = np.full(u.shape, np.inf)
        for a, b, pot in self._gap_potentials:
            m = (u > a) & (v < b)
            if np.any(m):
                out[m] = pot(v[m]) - pot(u[m])
        out = np.where(u == v, 0.0, out)
        return out

    def eval(self, t):
        return self(t)


def gap_intervals(delta: DiagonalSection, grid_size: int = DECOMPOSITION_GRID):
    t = np.linspace(0.0, 1.0, grid_size)
    gap = delta.gap(t)
    pos = gap > _ZERO_GAP
    # isolated tangential touches of the identity inside a positive run
    touches = []
    inner = np.nonzero(
        pos[1:-1] & (gap[1:-1] <= gap[:-2]) & (gap[1:-1] <= gap[2:]) & (gap[1:-1] < 1e-6)
    )[0] + 1
    if inner.size:
        xs, vals = golden_min(lambda z, i: delta.gap(z), t[inner - 1], t[inner + 1], tol=1e-13)
        touches = sorted(float(x) for x, v in zip(xs, vals) if v <= _ZERO_GAP)

    def is_pos(z):
        return delta.gap(z) > _ZERO_GAP

    out = []
    i = 0
    n = t.size
    while i < n:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and pos[j + 1]:
            j += 1
        if i == 0:
            a = 0.0
        else:
            a = float(bisect_increasing(lambda z, k: is_pos(z).astype(float), 1.0,
                                        t[i - 1], t[i], xtol=1e-13))
        if j == n - 1:
            b = 1.0
        else:
            b = float(bisect_increasing(lambda z, k: (~is_pos(z)).astype(float), 1.0,
                                        t[j], t[j + 1], xtol=1e-13))
        a = 0.0 if a < 1e-12 else a
        b = 1.0 if b > 1.0 - 1e-12 else b
        cuts = [a] + [x for x in touches if a < x < b] + [b]
        out.extend((cuts[k], cuts[k + 1]) for k in range(len(cuts) - 1))
        i = j + 1
    return out


def comonotone_diagonal() -> DiagonalSection:
    return DiagonalSection(lambda t: t, deriv=lambda t: np.ones_like(t),
                           quasiconcave_gap=True, inverse=lambda x: x, name="comonotone")


def power_diagonal(k: float) -> DiagonalSection:
    """``delta(t) = t**k``; a genuine diagonal for ``1 <= k <= 2``."""
    k = float(k)

    def integral(u, v):
        def anti(s):
            with np.errstate(divide="ignore"):
                return np.log(s) - np.log1p(-s ** (k - 1.0)) / (k - 1.0)
        return anti(v) - anti(u)

    return DiagonalSection(
        lambda t: t ** k,
        deriv=lambda t: k * t ** (k - 1.0),
        quasiconcave_gap=k >= 1.0,
        gap_integral=integral if k > 1.0 else None,
        inverse=lambda x: x ** (1.0 / k),
        name=f"power({k:g})",
    )


def gumbel_diagonal(theta: float) -> DiagonalSection:
    d = power_diagonal(2.0 ** (1.0 / theta))
    return DiagonalSection(d.func, d.deriv, quasiconcave_gap=True, gap_integral=d.gap_integral,
                           inverse=d.inverse, name=f"gumbel({theta:g})")


def fh_lower_diagonal() -> DiagonalSection:
    return table_diagonal([0.0, 0.5, 1.0], [0.0, 0.0, 1.0], name="fh_lower")


def table_diagonal(t, delta, name: str = "table") -> DiagonalSection:
    """Piecewise-linear interpolant through ``(t, delta)``."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(delta, dtype=float)
    if t.size < 2 or t.size != d.size or np.any(np.diff(t) <= 0):
        from .errors import InvalidInput
        raise InvalidInput("table diagonal needs increasing t and matching delta")
    return DiagonalSection(
        lambda s: np.interp(s, t, d),
        representation="table",
        quasiconcave_gap=True,
        knots=t[1:-1].copy(),
        name=name,
    )


@dataclass(frozen=True)
class Violation:
    rule: str
    t: float
    s: float | None
    detail: str


@dataclass(frozen=True)
class DiagonalReport:
    passed: bool
    failures: list[Violation]

    def summary(self) -> str:
        if self.passed:
            return "diagonal: pass (D1-D4)"
        return "; ".join(f"{v.rule} violated at t={v.t:.6g}: {v.detail}" for v in self.failures)


def validate_diagonal(delta, grid_size: int = 10_001, n_random: int = 1000,
                      seed: int = 0) -> DiagonalReport:
    """Check boundary values, monotonicity, 2-Lipschitz and ``delta <= id``.

    D1 is checked at the endpoints; the others on a grid (adjacent pairs)
    plus random pairs.  Only the first witness per rule is reported.
    """
    f = delta if isinstance(delta, DiagonalSection) else DiagonalSection(delta)
    raw = f.func
    fails: list[Violation] = []
    d0 = float(raw(np.float64(0.0)))
    d1 = float(raw(np.float64(1.0)))
    if abs(d0) > 1e-15:
        fails.append(Violation("D1", 0.0, None, f"delta(0)={d0:.6g}"))
    if abs(d1 - 1.0) > 1e-15:
        fails.append(Violation("D1", 1.0, None, f"delta(1)={d1:.6g}"))

    t = np.linspace(0.0, 1.0, grid_size)
    v = np.asarray(raw(t), dtype=float)
    dv = np.diff(v)
    dt = np.diff(t)
    bad = np.nonzero(dv < -1e-15)[0]
    if bad.size:
        k = bad[0]
        fails.append(Violation("D2", float(t[k]), float(t[k + 1]), "decreasing"))
    bad = np.nonzero(np.abs(dv) > 2.0 * dt + 1e-12)[0]
    if bad.size:
        k = bad[np.argmax(np.abs(dv[bad]) / dt[bad])]
        fails.append(Violation("D3", float(t[k + 1]), float(t[k]),
                               f"slope {abs(dv[k]) / dt[k]:.4g} > 2"))
    else:
        rng = np.random.default_rng(seed)
        a, b = rng.random(n_random), rng.random(n_random)
        va, vb = np.asarray(raw(a)), np.asarray(raw(b))
        bad = np.nonzero(np.abs(va - vb) > 2.0 * np.abs(a - b) + 1e-12)[0]
        if bad.size:
            k = bad[0]
            fails.append(Violation("D3", float(a[k]), float(b[k]), "2-Lipschitz fails"))
    bad = np.nonzero(v > t + 1e-15)[0]
    if bad.size:
        k = bad[np.argmax(v[bad] - t[bad])]
        fails.append(Violation("D4", float(t[k]), None, f"delta(t)-t={v[k] - t[k]:.3g}"))
    return DiagonalReport(not fails, fails)


@dataclass(frozen=True)
class ArchimedeanGenerator:
    """Decreasing convex ``psi`` on ``[0, inf)`` with ``psi(0) = 1``."""

    psi: Callable
    psi_inv: Callable
    name: str = "archimedean"
    theta: float | None = None


def gumbel_generator(theta: float) -> ArchimedeanGenerator:
    if theta < 1.0:
        from .errors import InvalidInput
        raise InvalidInput("Gumbel needs theta >= 1")

    def psi(s):
        return np.exp(-np.asarray(s, dtype=float) ** (1.0 / theta))

    def psi_inv(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return (-np.log(u)) ** theta

    return ArchimedeanGenerator(psi, psi_inv, "gumbel", theta)


@dataclass(frozen=True, eq=False)
class Copula:
    func: Callable
    family: str = "custom"
    diagonal: DiagonalSection | None = None

    def __call__(self, u, v):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        return clamp_prob(self.func(u, v))

    def eval(self, u, v):
        return self(u, v)


def fh_upper() -> Copula:
    return Copula(np.minimum, "fh_upper", comonotone_diagonal())


def fh_lower() -> Copula:
    return Copula(lambda u, v: np.maximum(u + v - 1.0, 0.0), "fh_lower", fh_lower_diagonal())


def independence() -> Copula:
    return Copula(lambda u, v: u * v, "independence", power_diagonal(2.0))


def archimedean_copula(gen: ArchimedeanGenerator) -> Copula:
    def c(u, v):
        with np.errstate(over="ignore"):
            return gen.psi(gen.psi_inv(u) + gen.psi_inv(v))

    return Copula(c, f"archimedean({gen.name})", archimedean_diagonal(gen))


def archimedean_diagonal(gen: ArchimedeanGenerator) -> DiagonalSection:
    if gen.name == "gumbel" and gen.theta is not None:
        return gumbel_diagonal(gen.theta)
    return DiagonalSection(lambda t: gen.psi(2.0 * gen.psi_inv(t)), name=f"{gen.name}-diagonal")


def diagonal_copula(delta: DiagonalSection) -> Copula:
    """``min(u, v, (delta(u) + delta(v))/2)``, the largest symmetric copula
    with diagonal ``delta``."""
    return Copula(lambda u, v: np.minimum(np.minimum(u, v), 0.5 * (delta(u) + delta(v))),
                  "diagonal", delta)


def mix_copulas(w: float, c1: Copula, c2: Copula) -> Copula:
    return Copula(lambda u, v: w * c1(u, v) + (1.0 - w) * c2(u, v),
                  f"mixture({c1.family},{c2.family})", c1.diagonal)


def _gap_inf(delta: DiagonalSection, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``inf{t - delta(t) : t in [lo, hi]}`` elementwise."""
    if delta.quasiconcave_gap:
        m = np.minimum(delta.gap(lo), delta.gap(hi))
        for k in delta.knots:
            inside = (lo < k) & (k < hi)
            if np.any(inside):
                m = np.where(inside, np.minimum(m, delta.gap(k)), m)
        return m
    out = np.empty(lo.shape)
    s = np.linspace(0.0, 1.0, BERTINO_GRID)
    for start in range(0, lo.size, _CHUNK):
        a = lo[start:start + _CHUNK]
        b = hi[start:start + _CHUNK]
        pts = a[:, None] + (b - a)[:, None] * s[None, :]
        vals = delta.gap(pts)
        k = np.argmin(vals, axis=1)
        best = vals[np.arange(a.size), k]
        kl = np.maximum(k - 1, 0)
        kr = np.minimum(k + 1, s.size - 1)
        la = pts[np.arange(a.size), kl]
        rb = pts[np.arange(a.size), kr]
        _, ref = golden_min(lambda z, i: delta.gap(z), la, rb, tol=1e-13)
        out[start:start + _CHUNK] = np.minimum(best, ref)
    return out


def bertino(delta: DiagonalSection) -> Copula:
    """Smallest copula with diagonal ``delta``::

        B(u, v) = min(u, v) - inf{t - delta(t) : min(u, v) <= t <= max(u, v)}
    """

    def b(u, v):
        u, v = np.broadcast_arrays(u, v)
        lo = np.minimum(u, v).ravel()
        hi = np.maximum(u, v).ravel()
        return (lo - _gap_inf(delta, lo, hi)).reshape(u.shape)

    return Copula(b, "bertino", delta)


@dataclass(frozen=True, eq=False)
class PartialDiagonal:
    """``D = F1 o G^-`` on the closure of the range of ``G``.

    ``gaps`` holds the open intervals ``(G(a-), G(a))`` cut out by atoms
    ``a`` of ``G``; ``D`` is NaN strictly inside them.
    """

    pair: OrderedMarginalPair
    gaps: np.ndarray  # shape (k, 2)
    gap_atoms: np.ndarray
    diagonal: DiagonalSection  # D itself with continuity hints

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._raw(t), dtype=float)
        if self.gaps.size:
            l, u = self.gaps[:, 0], self.gaps[:, 1]
            inside = (t[..., None] > l) & (t[..., None] < u)
            out = np.where(inside.any(axis=-1), np.nan, out)
        return out

    def _raw(self, t):
        t = np.asarray(t, dtype=float)
        pair = self.pair
        val = pair.f1.cdf(pair.g.quantile(np.clip(t, 0.0, 1.0)))
        if self.gaps.size:
            for (l, _), a in zip(self.gaps, self.gap_atoms):
                val = np.where(np.abs(t - l) <= 1e-15, pair.f1.cdf_left(a), val)
        return clamp_prob(val)

    def neighbors(self, x):
        """Nearest range points below and above ``x``."""
        x = np.asarray(x, dtype=float)
        lo, hi = x.copy(), x.copy()
        for l, u in self.gaps:
            inside = (x > l) & (x < u)
            lo = np.where(inside, l, lo)
            hi = np.where(inside, u, hi)
        return lo, hi


def diagonal_from_marginals(pair: OrderedMarginalPair) -> PartialDiagonal:
    """``D(t) = F1(G^-(t))`` restricted to the range of ``G``."""
    atoms = pair.atoms
    gaps, gap_atoms = [], []
    if atoms.size:
        left = pair.g.cdf_left(atoms)
        right = pair.g.cdf(atoms)
        keep = right - left > 0
        gaps = np.column_stack([left[keep], right[keep]])
        gap_atoms = atoms[keep]
    gaps = np.asarray(gaps, dtype=float).reshape(-1, 2)
    gap_atoms = np.asarray(gap_atoms, dtype=float)

    def func(t):
        return clamp_prob(pair.f1.cdf(pair.g.quantile(t)))

    deriv = None
    if pair.is_continuous and pair.has_density:
        def deriv(t):
            x = pair.g.quantile(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                return pair.f1.pdf(x) / pair.g.pdf(x)

    unimodal = pair.unimodal_info is not None and pair.unimodal_info.is_unimodal
    diag = DiagonalSection(func, deriv=deriv, quasiconcave_gap=unimodal and not atoms.size,
                           name="F1oG^-")
    return PartialDiagonal(pair, gaps, gap_atoms, diag)


def inverse_gap_integral_x(pair: OrderedMarginalPair, x_lo, x_hi, *, atol: float = 1e-12):
    """``integral_{x_lo}^{x_hi} g(s) / H(s) ds`` for a batch of intervals."""
    x_lo, x_hi = np.broadcast_arrays(np.asarray(x_lo, dtype=float), np.asarray(x_hi, dtype=float))
    shape = x_lo.shape
    a, b = x_lo.ravel(), x_hi.ravel()
    lo_s, hi_s = pair.bounds
    a = np.clip(a, lo_s, hi_s)
    b = np.clip(b, lo_s, hi_s)

    def f(s, _):
        with np.errstate(divide="ignore", invalid="ignore"):
            return pair.g.pdf(s) / pair.H(s)

    res = integrate_many(f, a, b, atol=atol, rtol=1e-13)
    return res.value.reshape(shape)


def extend_diagonal(D: PartialDiagonal) -> DiagonalSection:
    """Smallest diagonal section agreeing with ``D`` on the range of ``G``::

        delta_G(x) = max(D(x-), D(x+) - 2 (x+ - x))
    """
    if not D.gaps.size:
        return D.diagonal
    lows = D._raw(D.gaps[:, 0])
    highs = D._raw(D.gaps[:, 1])
    gaps = D.gaps

    def func(t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(D._raw(t), dtype=float)
        for (l, u), dl, du in zip(gaps, lows, highs):
            inside = (t > l) & (t < u)
            if np.any(inside):
                out = np.where(inside, np.maximum(dl, du - 2.0 * (u - t)), out)
        return out

    pair = D.pair
    quasi = pair.is_continuous is False and (
        np.all([c.atoms.size > 0 and not c.has_density for c in (pair.f1, pair.f2)])
        or (pair.unimodal_info is not None and pair.unimodal_info.is_unimodal)
    )
    knots = np.unique(gaps.ravel())
    knots = knots[(knots > 0.0) & (knots < 1.0)]
    return DiagonalSection(func, quasiconcave_gap=bool(quasi), knots=knots, name="delta_G")


def marginals_from_diagonal(delta: DiagonalSection) -> tuple[Cdf, Cdf]:
    """Marginals ``F1(x) = x`` and ``F2(x) = 2 delta^-(x+) - x`` on ``[0, 1]``
    whose ``D`` is ``delta``."""
    def phi(u):
        return np.clip(2.0 * delta.inverse_right(u) - u, 0.0, 1.0)

    phi_deriv = None
    if delta.deriv is not None:
        def phi_deriv(u):
            with np.errstate(divide="ignore"):
                return 2.0 / delta.deriv(delta.inverse_right(u)) - 1.0

    return Uniform(0.0, 1.0), Transformed(Uniform(0.0, 1.0), phi, phi_deriv=phi_deriv,
                                          name=f"from_diagonal({delta.name})")


def ordered_joint_cdf(pair: OrderedMarginalPair, ctilde: Copula, *,
                      check: bool = True) -> JointLaw:
    """Joint cdf of ``(X1, X2)`` built from a compatible symmetric copula.

    Raises
    ------
    IncompatibleCopula
        If ``C~(G(x), G(x)) != F1(x)`` or ``C~`` is asymmetric on the range
        of ``G`` (tolerance 1e-9).
    """
    if check:
        worst, where = compatibility_defect(pair, ctilde)
        if worst > COMPAT_TOL:
            raise IncompatibleCopula(
                f"copula incompatible with marginals: defect {worst:.3g} {where}", worst=worst
            )

    f1, g = pair.f1, pair.g

    def F(x1, x2):
        x1, x2 = np.broadcast_arrays(x1, x2)
        below = x1 <= x2
        off = 2.0 * ctilde(g.cdf(x1), g.cdf(x2)) - f1.cdf(x2)
        return np.where(below, f1.cdf(x1), off)

    return JointLaw(F, f"ordered({ctilde.family})", pair)


def compatibility_defect(pair: OrderedMarginalPair, ctilde: Copula,
                         grid_size: int = COMPAT_GRID) -> tuple[float, str]:
    x = pair.grid(grid_size)
    u = pair.G(x)
    diag = np.abs(ctilde(u, u) - pair.f1.cdf(x))
    k = int(np.argmax(diag))
    worst, where = float(diag[k]), f"(diagonal at x={x[k]:.6g})"
    sub = np.unique(u[:: max(1, u.size // 64)])
    a, b = np.meshgrid(sub, sub)
    asym = np.abs(ctilde(a, b) - ctilde(b, a))
    j = int(np.argmax(asym))
    if asym.flat[j] > worst:
        worst = float(asym.flat[j])
        where = f"(asymmetry at u={a.flat[j]:.6g}, v={b.flat[j]:.6g})"
    return worst, where
