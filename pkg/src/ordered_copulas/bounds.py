"""Pointwise bounds on ordered joint laws.

``L`` is the smallest joint cdf with marginals ``F1, F2`` and ``X1 >= X2``::

    L(x1, x2) = F1(x1)                                  if x1 <= x2
              = F2(x2) - inf_{x2 <= s <= x1} H(s)       otherwise

``min(F1(x1), F2(x2))`` is the largest.  ``P`` is Rogers' law, which puts as
much mass as possible on the diagonal.
"""

from __future__ import annotations

import numpy as np

from .distcore import Empirical, JointLaw, OrderedMarginalPair
from .errors import InvalidInput, UnsupportedForDiscrete
from .quadrature import golden_min

INF_GRID = 4097
ROGERS_GRID = 1025
SUPPORT_EPS = 1e-9
SUPPORT_EPS_EMPIRICAL = 1e-6
_CHUNK = 512


def _as_arrays(x1, x2):
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    if np.any(np.isnan(x1)) or np.any(np.isnan(x2)):
        raise InvalidInput("coordinates must not be NaN")
    return x1, x2


def _is_unimodal(pair: OrderedMarginalPair) -> bool:
    info = pair.unimodal_info
    return info is not None and info.is_unimodal


def inf_H(pair: OrderedMarginalPair, a, b, grid_size: int = INF_GRID) -> np.ndarray:
    """``inf{H(s) : a <= s <= b}`` elementwise for ``a <= b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    a, b = a.ravel(), b.ravel()
    ends = np.minimum(pair.H(a), pair.H(b))
    if _is_unimodal(pair):
        return ends.reshape(shape)

    lo, hi = pair.bounds
    ca = np.clip(a, lo, hi)
    cb = np.clip(b, lo, hi)
    out = ends.copy()
    s = np.linspace(0.0, 1.0, grid_size)
    atoms = pair.atoms
    for start in range(0, a.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        pa, pb = ca[sl], cb[sl]
        pts = pa[:, None] + (pb - pa)[:, None] * s[None, :]
        vals = pair.H(pts)
        k = np.argmin(vals, axis=1)
        rows = np.arange(pa.size)
        best = vals[rows, k]
        la = pts[rows, np.maximum(k - 1, 0)]
        rb = pts[rows, np.minimum(k + 1, s.size - 1)]
        _, ref = golden_min(lambda z, i: pair.H(z), la, rb, tol=1e-12)
        best = np.minimum(best, ref)
        if atoms.size:
            inside = (atoms[None, :] >= a[sl, None]) & (atoms[None, :] <= b[sl, None])
            ha = np.where(inside, pair.H(atoms)[None, :], np.inf)
            best = np.minimum(best, ha.min(axis=1))
        out[sl] = np.minimum(out[sl], best)
    return out.reshape(shape)


def lower_bound_L(pair: OrderedMarginalPair) -> JointLaw:
    """The minimal joint law ``L``.

    For unimodal ``H`` the infimum sits at an end of ``[x2, x1]``, giving
    ``F1(x1) - min(F1(x1) - F1(x2), F2(x1) - F2(x2))``.
    """

    def L(x1, x2):
        x1, x2 = _as_arrays(x1, x2)
        out = np.array(pair.f1.cdf(x1), dtype=float)
        off = x1 > x2
        if np.any(off):
            a, b = x2[off], x1[off]
            out[off] = pair.f2.cdf(a) - inf_H(pair, a, b)
        return out

    return JointLaw(L, "L", pair)


def upper_bound(pair: OrderedMarginalPair) -> JointLaw:
    """The comonotone law ``min(F1(x1), F2(x2))``."""

    def M(x1, x2):
        x1, x2 = _as_arrays(x1, x2)
        return np.minimum(pair.f1.cdf(x1), pair.f2.cdf(x2))

    return JointLaw(M, "upper", pair)


def rogers_P(pair: OrderedMarginalPair, grid_size: int = ROGERS_GRID) -> JointLaw:
    """Rogers' law ``P(x1, x2) = sup_{v <= x2} [F2(v) - inf_{v <= s <= x1} H(s)]``
    for ``x1 > x2`` and ``F1(x1)`` otherwise.

    The outer supremum runs over a grid that contains ``v = x2``, so the
    result never drops below ``L``.
    """
    h_fine = 4 * (grid_size - 1) + 1

    def P(x1, x2):
        x1, x2 = _as_arrays(x1, x2)
        out = np.array(pair.f1.cdf(x1), dtype=float)
        off = np.nonzero((x1 > x2).ravel())[0]
        if off.size == 0:
            return out
        a = x2.ravel()[off]
        b = x1.ravel()[off]
        tail = inf_H(pair, a, b)
        base = pair.f2.cdf(a) - tail
        lo = pair.bounds[0]
        start = np.minimum(lo, a)
        s = np.linspace(0.0, 1.0, h_fine)
        best = base.copy()
        for c0 in range(0, a.size, _CHUNK):
            sl = slice(c0, c0 + _CHUNK)
            pts = start[sl, None] + (a[sl] - start[sl])[:, None] * s[None, :]
            hv = pair.H(pts)
            # inf of H over [v, x2] by suffix minimum on the fine grid
            suffix = np.minimum.accumulate(hv[:, ::-1], axis=1)[:, ::-1]
            v = pts[:, ::4]
            inf_v = np.minimum(suffix[:, ::4], tail[sl, None])
            obj = pair.f2.cdf(v) - inf_v
            best[sl] = np.maximum(best[sl], obj.max(axis=1))
        np.put(out, off, best)
        return out

    return JointLaw(P, "rogers_P", pair)


def _in_support(F, x, eta):
    return F.cdf(x + eta) - F.cdf(x - eta) > 0.0


def support_contains(pair: OrderedMarginalPair, x1: float, x2: float,
                     eps: float | None = None) -> bool:
    """Whether ``(x1, x2)`` lies in the support of ``L``.

    Off the diagonal the point must have ``H(x1) = H(x2)`` (within ``eps``)
    with ``H`` larger in between, or ``H >= H(x1)`` in between and strictly
    smaller just outside.  A diagonal point ``(x, x)`` must lie in both
    marginal supports and must not be a point where ``S1`` ends on the right
    while ``S2`` ends on the left.

    Raises
    ------
    UnsupportedForDiscrete
        If either marginal has atoms.
    """
    if not pair.is_continuous:
        raise UnsupportedForDiscrete("support of L is only characterized for continuous marginals")
    if eps is None:
        empirical = isinstance(pair.f1, Empirical) or isinstance(pair.f2, Empirical)
        eps = SUPPORT_EPS_EMPIRICAL if empirical else SUPPORT_EPS
    x1, x2 = float(x1), float(x2)
    if np.isnan(x1) or np.isnan(x2):
        raise InvalidInput("coordinates must not be NaN")
    if x1 < x2 - eps:
        return False
    lo, hi = pair.bounds
    scale = max(1.0, hi - lo) if np.isfinite(hi - lo) else 1.0
    eta = 1e-6 * scale

    if abs(x1 - x2) <= eps:
        x = 0.5 * (x1 + x2)
        in1 = _in_support(pair.f1, x, eta)
        in2 = _in_support(pair.f2, x, eta)
        if not (in1 and in2):
            return False
        nothing_right_1 = pair.f1.cdf(x + eta) - pair.f1.cdf(x) <= 0.0
        nothing_left_2 = pair.f2.cdf(x) - pair.f2.cdf(x - eta) <= 0.0
        return not (nothing_right_1 and nothing_left_2)

    h1 = float(pair.H(x1))
    h2 = float(pair.H(x2))
    if abs(h1 - h2) > eps:
        return False
    h = 0.5 * (h1 + h2)
    if float(inf_H(pair, x2, x1)) < h - eps:
        return False
    thr = 1e-2 * eps
    step = min(eta, 0.25 * (x1 - x2))
    deep = float(inf_H(pair, x2 + step, x1 - step))
    if deep > h + thr:
        return True
    below = pair.H(np.array([x2 - eta, x1 + eta]))
    return bool(np.all(below < h - thr))
