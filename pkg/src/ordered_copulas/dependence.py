"""Kendall's tau and Spearman's rho: sample estimators and the smallest
values attainable by joint laws with ``X1 >= X2`` and given marginals.

Both minima are attained by ``L``.  For continuous marginals::

    tau_min = 4 E[F1(X2)] - 1 = 4 int_0^1 F1(F2^-(u)) du - 1

For ``rho`` the gap ``H`` must increase strictly up to its mode ``r`` and
decrease strictly afterwards; ``t(s) < s`` is then the left partner of
``s > r`` with ``H(t(s)) = H(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .distcore import OrderedMarginalPair
from .errors import InvalidInput, Unsupported, UnsupportedForDiscrete
from .quadrature import bisect_increasing, integrate, integrate_many

QUAD_ATOL = 1e-10
IV_TOL = 1e-9


def _sample_columns(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInput("expected an (n, 2) array of pairs")
    if arr.shape[0] < 2:
        raise InvalidInput("need at least two pairs")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("pairs must be finite")
    return arr[:, 0], arr[:, 1]


def kendall_tau_sample(pairs) -> float:
    """Sample Kendall tau (tau-b; tied pairs count as neither concordant
    nor discordant).  ``O(n log n)``."""
    x, y = _sample_columns(pairs)
    if np.all(x == x[0]) or np.all(y == y[0]):
        return 0.0
    return float(stats.kendalltau(x, y).statistic)


def spearman_rho_sample(pairs) -> float:
    """Pearson correlation of mid-ranks."""
    x, y = _sample_columns(pairs)
    rx = stats.rankdata(x)
    ry = stats.rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    den = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    return 0.0 if den == 0.0 else float(np.dot(rx, ry) / den)


def _require_continuous(pair: OrderedMarginalPair):
    if not pair.is_continuous:
        raise UnsupportedForDiscrete("tau and rho minima assume continuous marginals")


def min_kendall_tau(pair: OrderedMarginalPair, *, with_error: bool = False):
    """Smallest Kendall tau, ``4 int F1 dF2 - 1``."""
    _require_continuous(pair)
    f1, f2 = pair.f1, pair.f2
    res = integrate(lambda u: f1.cdf(f2.quantile(u)), 0.0, 1.0, atol=QUAD_ATOL)
    tau = float(np.clip(4.0 * res.value - 1.0, -1.0, 1.0))
    return (tau, 4.0 * res.error) if with_error else tau


def _strict_profile(pair: OrderedMarginalPair, what: str):
    _require_continuous(pair)
    info = pair.unimodal_info
    if info is None or not info.is_unimodal:
        raise Unsupported(f"{what} needs H unimodal")
    if pair.identical or not info.strict:
        raise Unsupported(f"{what} needs H strictly monotone on each side of its mode")
    return info


def _t_of(pair: OrderedMarginalPair, s: np.ndarray, r: float) -> np.ndarray:
    lo = pair.bounds[0]
    target = pair.H(s)
    return bisect_increasing(lambda z, i: pair.H(z), target, np.full_like(target, lo), r)


def solve_t(pair: OrderedMarginalPair, s):
    """Left partner ``t(s) <= r`` with ``H(t(s)) = H(s)`` for ``s >= r``."""
    info = _strict_profile(pair, "solve_t")
    r = info.r
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(s_arr)) or np.any(s_arr < r - 1e-12):
        raise InvalidInput(f"s must be at least the mode r={r:.12g}")
    out = np.where(s_arr <= r, r, _t_of(pair, np.maximum(s_arr, r), r))
    return float(out) if np.ndim(out) == 0 else out


def min_spearman_rho(pair: OrderedMarginalPair, *, with_error: bool = False):
    """Smallest Spearman rho, ``12 (I1 + I2 + I3) - 3`` with::

        I1 = int_{xL}^{r} F1 F2 dF1
        I2 = int_{r}^{xU} F1(s) F2(t(s)) dF1(s)
        I3 = int_{r}^{xU} F1(s) (F2(s) - F2(t(s))) dF2(s)

    Each integral is taken in probability scale (``u = F_i(s)``).
    """
    info = _strict_profile(pair, "min_spearman_rho")
    if not pair.common_support:
        raise Unsupported("min_spearman_rho needs a common support interval")
    f1, f2, r = pair.f1, pair.f2, info.r
    u1r = float(f1.cdf(r))
    u2r = float(f2.cdf(r))

    def i1(u):
        return u * f2.cdf(f1.quantile(u))

    def i2(u):
        s = np.maximum(f1.quantile(u), r)
        return u * f2.cdf(_t_of(pair, s, r))

    def i3(w):
        s = np.maximum(f2.quantile(w), r)
        return f1.cdf(s) * (w - f2.cdf(_t_of(pair, s, r)))

    funcs = (i1, i2, i3)
    res = integrate_many(lambda x, k: _dispatch(funcs, x, k),
                         [0.0, u1r, u2r], [u1r, 1.0, 1.0], atol=QUAD_ATOL)
    rho = float(np.clip(12.0 * np.sum(res.value) - 3.0, -1.0, 1.0))
    return (rho, 12.0 * float(np.sum(res.error))) if with_error else rho


def _dispatch(funcs, x, owner):
    out = np.empty_like(x)
    for j, fn in enumerate(funcs):
        m = owner == j
        if np.any(m):
            out[m] = fn(x[m])
    return out


def min_tau_independent_V(pair: OrderedMarginalPair, grid_size: int = 4097) -> float:
    """Kendall tau of ``L`` when ``F2 = 2 sqrt(F1) - F1``: always ``-1/3``.

    Raises
    ------
    InvalidInput
        If the relation fails somewhere on the grid (tolerance 1e-9).
    """
    x = pair.grid(grid_size)
    a = pair.f1.cdf(x)
    dev = np.abs(pair.f2.cdf(x) - (2.0 * np.sqrt(a) - a))
    if dev.max() > IV_TOL:
        k = int(np.argmax(dev))
        raise InvalidInput(f"F2 != 2 sqrt(F1) - F1 at x={x[k]:.6g} (off by {dev[k]:.3g})")
    return -1.0 / 3.0


@dataclass(frozen=True)
class DependenceReport:
    tau_min: float
    rho_min: float | None
    r: float | None
    quadrature_error_estimate: float
    rho_reason: str | None = None


def dependence_report(pair: OrderedMarginalPair) -> DependenceReport:
    tau, e_tau = min_kendall_tau(pair, with_error=True)
    info = pair.unimodal_info
    try:
        rho, e_rho = min_spearman_rho(pair, with_error=True)
        reason = None
    except Unsupported as exc:
        rho, e_rho, reason = None, 0.0, str(exc)
    r = info.r if info is not None else None
    return DependenceReport(tau, rho, r, e_tau + e_rho, reason)
