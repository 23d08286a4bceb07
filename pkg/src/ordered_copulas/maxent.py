"""Maximum-entropy joint laws of ordered pairs.

For a diagonal ``delta`` with ``delta(t) < t`` on ``(0, 1)`` the
maximum-entropy symmetric copula with that diagonal has density, for
``u <= v``::

    c(u, v) = delta'(v) (2 - delta'(u)) / (4 sqrt(gap(u) gap(v)))
              * exp(-1/2 int_u^v ds / gap(s)),      gap(s) = s - delta(s)

When ``delta`` touches the identity inside ``(0, 1)`` the density splits
into blocks, one per maximal interval where ``gap > 0``; in original
coordinates each block carries the same formula.

For an ordered pair with diagonal ``D = F1 o G^-`` the joint density is
``f(x1, x2) = 2 c_D(G(x1), G(x2)) g(x1) g(x2)`` on ``x1 >= x2``; where
``H > 0`` it reduces to::

    f(x1, x2) = f1(x1) f2(x2) / sqrt(H(x1) H(x2)) * exp(-int_{x2}^{x1} g / H)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .copula import (
    DiagonalSection,
    diagonal_from_marginals,
    extend_diagonal,
)
from .distcore import OrderedMarginalPair
from .errors import (
    EntropyUndefined,
    NoMaxEnt,
    Unsupported,
    UnsupportedForDiscrete,
    WrongBranch,
)
from .quadrature import Potential, integrate, integrate_many, integrate_triangle

EXP_CUT = 745.0
ENTROPY_ATOL = 1e-9
ENTROPY_OUTER_ATOL = 1e-8
CONDITION_EPS = (1e-6, 1e-8, 1e-10)
CONDITION_RTOL = 1e-6
CONDITION_MAX = 1e12
_LOG4 = np.log(4.0)


def _require_density(pair: OrderedMarginalPair):
    if not pair.is_continuous:
        raise UnsupportedForDiscrete("maximum entropy needs absolutely continuous marginals")
    if not pair.has_density:
        raise Unsupported("maximum entropy needs marginal densities")
    if not pair.common_support:
        raise Unsupported("maximum entropy needs both marginals on the same support interval")


def entropy_condition_value(pair: OrderedMarginalPair) -> tuple[float, bool]:
    """``-int log H dG`` and whether it is judged finite.

    The integral ``-int log H(x) g(x) dx`` is truncated to
    ``[G^-(eps), G^-(1 - eps)]`` for shrinking ``eps``; it counts as finite
    when the last two truncations agree to ``1e-6`` relative and stay below
    ``1e12``.
    """
    _require_density(pair)
    if pair.identical:
        return float("inf"), False

    def integrand(x):
        g = pair.g.pdf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(g > 0.0, -np.log(pair.H(x)) * g, 0.0)

    eps = np.asarray(CONDITION_EPS)
    a = pair.g.quantile(eps)
    b = pair.g.quantile(1.0 - eps)
    res = integrate_many(lambda x, _: integrand(x), a, b, atol=1e-10, rtol=1e-12)
    v = res.value
    if not np.all(np.isfinite(v)):
        return float("inf"), False
    last = v[-1]
    stable = abs(v[-1] - v[-2]) <= CONDITION_RTOL * max(1.0, abs(last))
    return float(last), bool(stable and abs(last) < CONDITION_MAX)


def entropy_condition(pair: OrderedMarginalPair) -> bool:
    """Whether ``-int log H dG < inf``."""
    return entropy_condition_value(pair)[1]


def _log_c(delta: DiagonalSection, u, v):
    """``log c`` from the simple formula for ``u <= v`` (no block checks)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        du = delta.derivative(u)
        dv = delta.derivative(v)
        gu = delta.gap(u)
        gv = delta.gap(v)
        expo = 0.5 * delta.integrate_gap(u, v)
        out = (np.log(dv) + np.log(2.0 - du) - _LOG4
               - 0.5 * (np.log(gu) + np.log(gv)) - expo)
    out = np.where(expo > EXP_CUT, -np.inf, out)
    return np.where(np.isnan(out), -np.inf, out)


def _sorted_uv(u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return np.minimum(u, v), np.maximum(u, v)


def cbar_density(delta: DiagonalSection):
    """Maximum-entropy copula density for a diagonal below the identity on
    ``(0, 1)``.

    Raises
    ------
    WrongBranch
        If ``delta`` touches the identity inside ``(0, 1)``.
    """
    if delta.intervals != [(0.0, 1.0)]:
        raise WrongBranch("diagonal touches the identity inside (0, 1); use c_density_general")

    def c(u, v):
        a, b = _sorted_uv(u, v)
        shape = a.shape
        a, b = a.ravel(), b.ravel()
        out = np.zeros(a.shape)
        live = (a > 0.0) & (b < 1.0)
        if np.any(live):
            out[live] = np.exp(_log_c(delta, a[live], b[live]))
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    return c


def c_density_general(delta: DiagonalSection):
    """Block-diagonal maximum-entropy copula density.

    Each interval ``(alpha, beta)`` of ``{delta < id}`` contributes the
    rescaled simple density on ``(alpha, beta)^2``; the density vanishes
    elsewhere (identically so for ``delta = id``).
    """
    blocks = delta.intervals

    def c(u, v):
        a, b = _sorted_uv(u, v)
        shape = a.shape
        a, b = a.ravel(), b.ravel()
        out = np.zeros(a.shape)
        for lo, hi in blocks:
            m = (a > lo) & (b < hi)
            if np.any(m):
                out[m] = np.exp(_log_c(delta, a[m], b[m]))
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    return c


def rescaled_block_diagonal(delta: DiagonalSection, alpha: float, beta: float) -> DiagonalSection:
    """``delta_j(t) = (delta(alpha + t w) - alpha) / w`` with ``w = beta - alpha``."""
    w = beta - alpha
    deriv = None
    if delta.deriv is not None:
        def deriv(t):
            return delta.deriv(alpha + np.asarray(t) * w)
    return DiagonalSection(lambda t: (delta(alpha + np.asarray(t) * w) - alpha) / w,
                           deriv=deriv, name=f"{delta.name}[{alpha:.4g},{beta:.4g}]")


@dataclass(frozen=True, eq=False)
class MaxEntDensity:
    """Maximum-entropy joint density on ``{x1 >= x2}``."""

    pair: OrderedMarginalPair
    delta: DiagonalSection
    intervals: list
    blocks: list  # x-space intervals where H > 0
    branch: str
    _potentials: list = field(repr=False)
    _nudge: float = field(repr=False)

    def block_of(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.full(x.shape, -1)
        for j, (a, b) in enumerate(self.blocks):
            idx = np.where((x > a) & (x < b), j, idx)
        return idx

    def _clip(self, x):
        lo, hi = self.pair.f1.lo, self.pair.f1.hi
        return np.clip(x, lo + self._nudge, hi - self._nudge)

    def log_R(self, x, j: int):
        """``log R = log sqrt(H) - Psi`` on block ``j``, with ``Psi' = g/H``.

        The conditional survival of ``X1`` given ``X2 = x2`` is
        ``R(x1) / R(x2)``.
        """
        x = self._clip(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(self.pair.H(x)) - self._potentials[j](x)

    def log_density_x(self, x1, x2):
        """Log-density from the marginal-scale formula, block by block."""
        pair = self.pair
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        shape = x1.shape
        a, b = x1.ravel(), x2.ravel()
        out = np.full(a.shape, -np.inf)
        ca, cb = self._clip(a), self._clip(b)
        ja, jb = self.block_of(ca), self.block_of(cb)
        ok = (a >= b) & (ja >= 0) & (ja == jb) & (a >= pair.f1.lo) & (b <= pair.f1.hi)
        for j in range(len(self.blocks)):
            m = ok & (ja == j)
            if not np.any(m):
                continue
            psi = self._potentials[j]
            with np.errstate(divide="ignore", invalid="ignore"):
                val = (np.log(pair.f1.pdf(ca[m])) + np.log(pair.f2.pdf(cb[m]))
                       - 0.5 * (np.log(pair.H(ca[m])) + np.log(pair.H(cb[m])))
                       - (psi(ca[m]) - psi(cb[m])))
            out[m] = np.where(np.isnan(val), -np.inf, val)
        return out.reshape(shape)

    def density_via_copula(self, x1, x2):
        """``2 c_D(G(x1), G(x2)) g(x1) g(x2)`` for ``x1 >= x2``."""
        pair = self.pair
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        c = c_density_general(self.delta)
        a, b = self._clip(x1), self._clip(x2)
        val = 2.0 * np.asarray(c(pair.G(a), pair.G(b))) * pair.g.pdf(a) * pair.g.pdf(b)
        inside = (x1 >= x2) & (x1 >= pair.f1.lo) & (x2 <= pair.f1.hi)
        return np.where(inside, val, 0.0)

    def __call__(self, x1, x2):
        if self.branch == "general":
            out = self.density_via_copula(x1, x2)
        else:
            out = np.exp(self.log_density_x(x1, x2))
        return float(out) if np.ndim(out) == 0 else out

    def eval(self, x1, x2):
        return self(x1, x2)


def _x_blocks(pair: OrderedMarginalPair, intervals) -> list[tuple[float, float]]:
    lo, hi = pair.f1.lo, pair.f1.hi
    out = []
    for a, b in intervals:
        xa = lo if a <= 0.0 else float(pair.g.quantile(a))
        xb = hi if b >= 1.0 else float(pair.g.quantile(b))
        out.append((xa, xb))
    return out


def maxent_joint_density(pair: OrderedMarginalPair) -> MaxEntDensity:
    """The entropy-maximizing joint density.

    Raises
    ------
    NoMaxEnt
        When ``-int log H dG`` diverges; the supremum of the entropy is then
        ``-inf``.
    """
    _require_density(pair)
    if not entropy_condition(pair):
        raise NoMaxEnt("entropy condition fails (-int log H dG diverges)")
    delta = extend_diagonal(diagonal_from_marginals(pair))
    intervals = delta.intervals
    blocks = _x_blocks(pair, intervals)
    tlo, thi = pair.bounds
    pots = []

    def q(s):
        with np.errstate(divide="ignore", invalid="ignore"):
            return pair.g.pdf(s) / pair.H(s)

    for a, b in blocks:
        pots.append(Potential(q, max(a, tlo), min(b, thi)))
    lo, hi = pair.f1.lo, pair.f1.hi
    nudge = 1e-12 * (hi - lo) if np.isfinite(hi - lo) else 0.0
    branch = "simplified" if intervals == [(0.0, 1.0)] else "general"
    return MaxEntDensity(pair, delta, intervals, blocks, branch, pots, nudge)


@dataclass(frozen=True)
class EntropyReport:
    shannon: float
    decomposition: float | None
    error_estimate: float
    converged: bool


def _xlogx(f):
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(f > 0.0, f * np.log(f), 0.0)


def _check(value, err, conv, what):
    if not np.isfinite(value) or (not conv and err > 1e-3 * max(1.0, abs(value))):
        raise EntropyUndefined(f"{what}: quadrature does not settle (value {value}, error {err:.3g})")


def shannon_entropy(f, lo: float, hi: float) -> tuple[float, float, bool]:
    """``-int int f log f`` over ``lo <= x2 <= x1 <= hi``."""
    res = integrate_triangle(lambda a, b: -_xlogx(f(a, b)), lo, hi,
                             atol=ENTROPY_ATOL, outer_atol=ENTROPY_OUTER_ATOL)
    return res.value, res.error, res.converged


def copula_entropy(delta: DiagonalSection) -> tuple[float, float, bool]:
    """``-int int c log c`` over ``[0, 1]^2`` for the block density of
    ``delta`` (twice the integral over ``u <= v``)."""
    c = c_density_general(delta)
    res = integrate_triangle(lambda v, u: -_xlogx(c(u, v)), 0.0, 1.0,
                             atol=ENTROPY_ATOL, outer_atol=ENTROPY_OUTER_ATOL)
    return 2.0 * res.value, 2.0 * res.error, res.converged


def differential_entropy(density, bounds: tuple[float, float] | None = None) -> EntropyReport:
    """Differential entropy in nats.

    ``density`` is a :class:`MaxEntDensity` or any vectorized ``f(x1, x2)``
    supported on ``x1 >= x2`` (then ``bounds`` is required).  For a
    :class:`MaxEntDensity` the value is also computed as copula entropy
    ``- log 2 - 2 int g log g``.

    Raises
    ------
    EntropyUndefined
        If a quadrature does not settle.
    """
    if isinstance(density, MaxEntDensity):
        pair = density.pair
        lo, hi = bounds or pair.bounds
        val, err, conv = shannon_entropy(density, lo, hi)
        _check(val, err, conv, "shannon entropy")
        cval, cerr, cconv = copula_entropy(density.delta)
        _check(cval, cerr, cconv, "copula entropy")
        gres = integrate(lambda z: _xlogx(pair.g.pdf(z)), lo, hi, atol=1e-12)
        dec = cval - np.log(2.0) - 2.0 * gres.value
        return EntropyReport(val, float(dec), err + cerr + 2.0 * gres.error,
                             conv and cconv and gres.converged)
    if bounds is None:
        raise Unsupported("bounds are required for a plain density function")
    val, err, conv = shannon_entropy(density, *bounds)
    _check(val, err, conv, "shannon entropy")
    return EntropyReport(val, None, err, conv)
