"""Vectorized numerical kernels: adaptive Gauss-Kronrod quadrature,
bisection and golden-section search.

All routines operate on whole batches of problems at once so that the
callers (nested integrals, per-sample root solves) stay in numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Kronrod 15-point abscissae (positive half, descending) and weights,
# with the embedded 7-point Gauss weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes sit at odd Kronrod indices (1, 3, 5, 7 from the left end).
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])

DEFAULT_ATOL = 1e-10
DEFAULT_MAX_DEPTH = 40
MAX_PANELS = 200_000
PANELS_PER_PROBLEM = 2_000
# larger batches are split so the panel cap stays generous per problem
CHUNK = 2_048
TABLE_NODES = 16385
INNER_SLACK = 100.0
# table nodes reach within about 1e-16 of the interval ends
POTENTIAL_SPAN = 3.2
POTENTIAL_CELL_ORDER = 10
_ROUNDOFF = 50.0 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float
    converged: np.ndarray | bool


def integrate_many(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a,
    b,
    *,
    atol: float = DEFAULT_ATOL,
    rtol: float = 0.0,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> QuadResult:
    """Integrate a batch of one-dimensional problems.

    Each problem keeps a list of panels.  While the summed Kronrod-Gauss
    error of a problem exceeds ``max(atol, rtol*|value|)``, every panel
    whose error is above the problem tolerance divided by its panel count
    is bisected.  This equidistributes the error, so endpoint
    singularities cost a few panels per level instead of forcing every
    panel below a length-proportional share.

    Parameters
    ----------
    f : callable
        ``f(x, owner)`` evaluated on flat arrays; ``owner[i]`` is the index
        of the problem that node ``x[i]`` belongs to.
    a, b : array_like
        Finite integration limits, one pair per problem.  ``b < a`` gives
        the negated integral.
    atol, rtol : float
        Absolute and relative tolerance per problem.
    max_depth : int
        Maximum number of bisections of any panel.

    Returns
    -------
    QuadResult
        Arrays of values, error estimates and convergence flags.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    a = a.ravel()
    b = b.ravel()
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("integration limits must be finite")
    m = a.size
    if m > CHUNK:
        parts = [
            integrate_many(lambda x, k, o=o: f(x, k + o), a[o:o + CHUNK], b[o:o + CHUNK],
                           atol=atol, rtol=rtol, max_depth=max_depth)
            for o in range(0, m, CHUNK)
        ]
        return QuadResult(np.concatenate([r.value for r in parts]),
                          np.concatenate([r.error for r in parts]),
                          np.concatenate([r.converged for r in parts]))
    sign = np.where(b < a, -1.0, 1.0)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)

    live = hi > lo
    # all panels, plus the subset waiting for evaluation
    pa = lo[live]
    pb = hi[live]
    owner = np.nonzero(live)[0]
    depth = np.zeros(owner.size, dtype=int)
    kron = np.empty(0)
    err = np.empty(0)
    floor = np.empty(0)
    n_old = 0
    bad = np.zeros(m, dtype=bool)

    while True:
        na, nb = pa[n_old:], pb[n_old:]
        if na.size:
            half = 0.5 * (nb - na)
            mid = 0.5 * (na + nb)
            x = mid[:, None] + half[:, None] * NODES[None, :]
            vals = np.asarray(
                f(x.ravel(), np.repeat(owner[n_old:], NODES.size)), dtype=float
            ).reshape(x.shape)
            k = half * (vals @ KRONROD_WEIGHTS)
            e = np.abs(k - half * (vals[:, _GAUSS_IDX] @ GAUSS_WEIGHTS))
            # differences below this are roundoff noise, not truncation error
            fl = _ROUNDOFF * half * (np.abs(vals) @ KRONROD_WEIGHTS)
            nonfinite = ~np.isfinite(e)
            bad[owner[n_old:][nonfinite]] = True
            e = np.where(nonfinite, np.inf, e)
            kron = np.concatenate([kron, k])
            err = np.concatenate([err, e])
            floor = np.concatenate([floor, fl])

        total = np.bincount(owner, weights=np.where(np.isfinite(kron), kron, 0.0), minlength=m)
        etot = np.bincount(owner, weights=np.where(np.isfinite(err), err, 0.0), minlength=m)
        count = np.bincount(owner, minlength=m)
        tol = np.maximum(atol, rtol * np.abs(total))
        need = (etot > tol) & ~bad & (count < PANELS_PER_PROBLEM)
        split = (need[owner] & (err > tol[owner] / np.maximum(count[owner], 1))
                 & (err > floor) & (depth < max_depth))
        if owner.size > MAX_PANELS or not np.any(split):
            break
        keep = ~split
        sa, sb = pa[split], pb[split]
        smid = 0.5 * (sa + sb)
        so, sd = owner[split], depth[split] + 1
        pa = np.concatenate([pa[keep], sa, smid])
        pb = np.concatenate([pb[keep], smid, sb])
        owner = np.concatenate([owner[keep], so, so])
        depth = np.concatenate([depth[keep], sd, sd])
        kron, err, floor = kron[keep], err[keep], floor[keep]
        n_old = kron.size

    noise = np.bincount(owner, weights=(err > floor).astype(float), minlength=m) == 0
    ok = ((etot <= tol) | noise) & ~bad & np.isfinite(total)
    total = np.where(bad, np.nan, total)
    return QuadResult(sign * total, np.where(bad, np.inf, etot), ok)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    atol: float = DEFAULT_ATOL,
    rtol: float = 0.0,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> QuadResult:
    """Adaptive integral of a vectorized scalar function over ``[a, b]``."""
    res = integrate_many(
        lambda x, _: f(x), [a], [b], atol=atol, rtol=rtol, max_depth=max_depth
    )
    return QuadResult(float(res.value[0]), float(res.error[0]), bool(res.converged[0]))


def integrate_piecewise(f, breaks, **kw) -> QuadResult:
    """Integrate over consecutive intervals of ``breaks`` and sum."""
    breaks = np.asarray(breaks, dtype=float)
    res = integrate_many(lambda x, _: f(x), breaks[:-1], breaks[1:], **kw)
    return QuadResult(
        float(np.sum(res.value)), float(np.sum(res.error)), bool(np.all(res.converged))
    )


def integrate_triangle(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    atol: float = 1e-10,
    outer_atol: float = 1e-9,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> QuadResult:
    """Integrate ``f(x1, x2)`` over ``lo <= x2 <= x1 <= hi``.

    The outer integral runs over ``x2``.  The inner one is taken in
    ``s = (x1 - x2) / (hi - x2)`` so every inner problem lives on ``[0, 1]``
    and integrands that blow up like ``1 / (hi - x2)`` near the corner stay
    bounded after the Jacobian.
    """
    conv = [True]

    def outer(x2, _):
        w = hi - x2

        def inner_f(s, k):
            return w[k] * f(x2[k] + s * w[k], x2[k])

        inner = integrate_many(inner_f, np.zeros_like(x2), np.ones_like(x2),
                               atol=atol, max_depth=max_depth)
        # near the corner rounding noise can keep an inner problem slightly
        # above atol; such a miss is far below what the outer sum resolves
        conv[0] &= bool(np.all(inner.converged | (inner.error <= INNER_SLACK * atol)))
        return inner.value

    res = integrate_many(outer, [lo], [hi], atol=outer_atol, max_depth=max_depth)
    return QuadResult(float(res.value[0]), float(res.error[0]),
                      bool(res.converged[0]) and conv[0])


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a, b, order: int = 20) -> np.ndarray:
    """Fixed-order Gauss-Legendre rule on a batch of intervals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = _gl_rule(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[..., None] + half[..., None] * x
    return half * (f(nodes.reshape(-1)).reshape(nodes.shape) @ w)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


class Potential:
    """Antiderivative of a positive integrand ``q`` on an open interval.

    The table nodes follow a double-exponential map that clusters them
    toward both ends, so each cell is short compared with its distance to
    the ends.  Cell integrals use a fixed Gauss-Legendre rule; values between nodes come from
    cubic Hermite interpolation with slopes ``q(node)``.  Points outside the
    table get an adaptive integral from the nearest end node.
    """

    def __init__(self, q, a: float, b: float, nodes: int = TABLE_NODES):
        self.q = q
        self.a, self.b = float(a), float(b)
        tau = np.linspace(-POTENTIAL_SPAN, POTENTIAL_SPAN, nodes)
        z = np.tanh(0.5 * np.pi * np.sinh(tau))
        x = np.unique(0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * z)
        x = x[(x > self.a) & (x < self.b)]
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.asarray(q(x), dtype=float)
        # nodes a few ulps from a singular end can evaluate q to inf; keep
        # the finite run around the middle
        bad = ~np.isfinite(slope)
        mid = x.size // 2
        left = np.nonzero(bad[:mid])[0]
        right = np.nonzero(bad[mid:])[0]
        i0 = left[-1] + 1 if left.size else 0
        i1 = mid + right[0] if right.size else x.size
        x, slope = x[i0:i1], slope[i0:i1]
        # each cell is short next to its distance from the ends, where q may
        # blow up, so a fixed Gauss-Legendre rule is already exact to rounding
        with np.errstate(divide="ignore", invalid="ignore"):
            cells = gauss_legendre(q, x[:-1], x[1:], POTENTIAL_CELL_ORDER)
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        self.x = x
        self.table = cum - cum[x.size // 2]
        self.slope = slope

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        x = self.x
        out = np.empty_like(flat)
        inner = (flat >= x[0]) & (flat <= x[-1])
        if np.any(inner):
            ti = flat[inner]
            j = np.clip(np.searchsorted(x, ti), 1, x.size - 1)
            x0, x1 = x[j - 1], x[j]
            h = x1 - x0
            s = (ti - x0) / h
            h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
            h10 = s * (1.0 - s) ** 2
            h01 = s * s * (3.0 - 2.0 * s)
            h11 = s * s * (s - 1.0)
            out[inner] = (h00 * self.table[j - 1] + h10 * h * self.slope[j - 1]
                          + h01 * self.table[j] + h11 * h * self.slope[j])
        outer = ~inner
        if np.any(outer):
            k = np.where(flat[outer] < x[0], 0, x.size - 1)
            res = integrate_many(lambda s, _: self.q(s), x[k], flat[outer],
                                 atol=1e-13, rtol=1e-12)
            out[outer] = self.table[k] + res.value
        return out.reshape(t.shape)


def bisect_increasing(func, target, lo, hi, *, iters: int = 1100, xtol: float = 0.0):
    """Smallest ``x`` in ``[lo, hi]`` with ``func(x) >= target``, elementwise.

    ``func`` must be nondecreasing and vectorized; it is called as
    ``func(x, idx)`` where ``idx`` are the flat indices of the problems being
    refined.  The bracket is assumed valid (``func(hi) >= target``).  Runs
    until the bracket collapses to adjacent floats or ``hi - lo <= xtol``.
    """
    target, lo, hi = np.broadcast_arrays(
        np.asarray(target, dtype=float), np.asarray(lo, dtype=float),
        np.asarray(hi, dtype=float),
    )
    shape = target.shape
    target = target.ravel()
    lo = lo.ravel().copy()
    hi = hi.ravel().copy()
    n = target.size
    # full-array sweeps while most problems are still open
    for it in range(iters):
        mid = 0.5 * (lo + hi)
        open_ = (hi - lo > xtol) & (mid > lo) & (mid < hi)
        if np.count_nonzero(open_) < n // 2 or not np.any(open_):
            break
        up = np.asarray(func(mid, np.arange(n))) >= target
        hi = np.where(open_ & up, mid, hi)
        lo = np.where(open_ & ~up, mid, lo)
    else:
        return hi.reshape(shape)
    mid = 0.5 * (lo + hi)
    act = np.nonzero((hi - lo > xtol) & (mid > lo) & (mid < hi))[0]
    for _ in range(iters - it):
        if act.size == 0:
            break
        l, h = lo[act], hi[act]
        mid = 0.5 * (l + h)
        up = np.asarray(func(mid, act)) >= target[act]
        hi[act] = np.where(up, mid, h)
        lo[act] = np.where(up, l, mid)
        nl, nh = lo[act], hi[act]
        nm = 0.5 * (nl + nh)
        moving = (nh - nl > xtol) & (nm > nl) & (nm < nh)
        act = act[moving]
    return hi.reshape(shape)


def golden_min(func, lo, hi, *, tol: float = 1e-12, iters: int = 200):
    """Elementwise golden-section minimization of a unimodal function.

    ``func(x, idx)`` receives the active problem indices.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a = np.array(lo, dtype=float, copy=True).ravel()
    b = np.array(hi, dtype=float, copy=True).ravel()
    idx_all = np.arange(a.size)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = func(c, idx_all)
    fd = func(d, idx_all)
    for _ in range(iters):
        act = np.nonzero(b - a > tol)[0]
        if act.size == 0:
            break
        left = fc[act] < fd[act]
        # shrink to [a, d] where f(c) < f(d), else [c, b]
        na = np.where(left, a[act], c[act])
        nb = np.where(left, d[act], b[act])
        nc = np.where(left, nb - invphi * (nb - na), d[act])
        nd = np.where(left, c[act], na + invphi * (nb - na))
        a[act], b[act] = na, nb
        fresh = np.where(left, nc, nd)
        ff = func(fresh, act)
        fc_new = np.where(left, ff, fd[act])
        fd_new = np.where(left, fc[act], ff)
        c[act], d[act] = nc, nd
        fc[act], fd[act] = fc_new, fd_new
    x = 0.5 * (a + b)
    return x, func(x, idx_all)
