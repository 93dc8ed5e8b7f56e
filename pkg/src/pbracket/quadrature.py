"""Adaptive Gauss-Kronrod quadrature with region indicators.

The integrator is a global adaptive G7/K15 scheme: the interval with the
largest error estimate ``|K15 - G7|`` is bisected until the summed estimate
falls under ``max(abs_tol, rel_tol * |I|)``.  Semi-infinite ranges are
mapped onto ``[0, 1)`` with ``x = lo + u / (1 - u)``.

Regions enter as boolean indicator functions.  Before integrating, the
indicator is probed on a uniform grid and every change of value is located
by bisection, so the quadrature only ever sees smooth pieces.  Features
narrower than ``(hi - lo) / probe_points`` can be missed by the probe grid.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError

# Kronrod abscissae (descending, last is the centre) and weights; Gauss weights
# belong to every other Kronrod node.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS = np.zeros(15)
GAUSS[1::2] = np.concatenate([_WG, _WG[-2::-1]])

_BISECT_STEPS = 64


@dataclass(frozen=True)
class Quadrature:
    """Quadrature settings shared by densities and expectation integrals."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2 ** 16
    probe_points: int = 257


DEFAULT = Quadrature()


def _gk(h: Callable, a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    r = 0.5 * (b - a)
    x = c[:, None] + r[:, None] * NODES[None, :]
    with np.errstate(all="ignore"):
        fx = np.asarray(h(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise IntegrationError("integrand is not finite on the integration range")
    k = r * (fx @ KRONROD)
    g = r * (fx @ GAUSS)
    return k, np.abs(k - g)


def _transform(lo: float, hi: float):
    """Map a piece onto a finite u-interval; returns (phi, jac, ua, ub)."""
    if math.isfinite(lo) and math.isfinite(hi):
        return (lambda u: u), (lambda u: np.ones_like(u)), lo, hi
    if math.isfinite(lo):
        return (lambda u: lo + u / (1.0 - u)), (lambda u: 1.0 / (1.0 - u) ** 2), 0.0, 1.0
    if math.isfinite(hi):
        return (lambda u: hi - u / (1.0 - u)), (lambda u: 1.0 / (1.0 - u) ** 2), 0.0, 1.0
    raise ValueError("doubly infinite piece must be split first")


def _pieces(lo: float, hi: float, points: Sequence[float]):
    cuts = sorted(p for p in points if lo < p < hi)
    if not cuts and math.isinf(lo) and math.isinf(hi):
        cuts = [0.0]
    edges = [lo, *cuts, hi]
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if a < b]


def _bisect(indicator: Callable, lo: np.ndarray, hi: np.ndarray, at_lo: np.ndarray) -> np.ndarray:
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        same = np.asarray(indicator(mid), dtype=bool) == at_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _probe_grid(a: float, b: float, n: int) -> np.ndarray:
    # endpoints included so boundaries next to them are seen; b itself may
    # map to infinity, so the last probe sits just inside
    u = np.linspace(a, b, max(n, 2))
    u[-1] = np.nextafter(b, a)
    return u


def indicator_segments(indicator: Callable, a: float, b: float, probes: int) -> list[tuple[float, float]]:
    """Sub-intervals of ``[a, b]`` on which ``indicator`` is true."""
    u = _probe_grid(a, b, probes)
    inside = np.asarray(indicator(u), dtype=bool)
    flips = np.nonzero(inside[1:] != inside[:-1])[0]
    if flips.size:
        cuts = _bisect(indicator, u[flips], u[flips + 1], inside[flips])
    else:
        cuts = np.empty(0)
    edges = [a, *cuts.tolist(), b]
    state = bool(inside[0])
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if state and lo < hi:
            out.append((lo, hi))
        state = not state
    return out


def _adaptive(h: Callable, segments: list[tuple[float, float]], quad: Quadrature):
    if not segments:
        return 0.0, 0.0
    a = np.array([s[0] for s in segments], dtype=float)
    b = np.array([s[1] for s in segments], dtype=float)
    k, e = _gk(h, a, b)
    heap = [(-ei, ai, bi, ki) for ai, bi, ki, ei in zip(a, b, k, e)]
    heapq.heapify(heap)
    total, err = float(k.sum()), float(e.sum())
    count = len(heap)
    steps = 0
    while err > max(quad.abs_tol, quad.rel_tol * abs(total)):
        if count >= quad.max_subdivisions:
            raise IntegrationError(
                f"no convergence after {count} subdivisions", estimate=total, error=err)
        neg, ai, bi, ki = heapq.heappop(heap)
        mid = 0.5 * (ai + bi)
        if not ai < mid < bi:
            raise IntegrationError(
                "interval shrank below machine resolution", estimate=total, error=err)
        k2, e2 = _gk(h, np.array([ai, mid]), np.array([mid, bi]))
        total += float(k2.sum()) - ki
        err += float(e2.sum()) + neg
        heapq.heappush(heap, (-e2[0], ai, mid, k2[0]))
        heapq.heappush(heap, (-e2[1], mid, bi, k2[1]))
        count += 1
        steps += 1
        if steps % 64 == 0:
            total = math.fsum(item[3] for item in heap)
            err = math.fsum(-item[0] for item in heap)
    return math.fsum(item[3] for item in heap), math.fsum(-item[0] for item in heap)


def integrate(f: Callable, lo: float, hi: float, quad: Quadrature = DEFAULT, *,
              points: Sequence[float] = (), indicator: Callable | None = None) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Maps an array of abscissae to an array of values.
    lo, hi : float
        Limits; either may be infinite.
    points : sequence of float
        Break points (peaks, kinks) the integrator should split at.
    indicator : callable, optional
        Restricts the integral to the set where it returns true.

    Returns
    -------
    value, abserr : float
    """
    if lo == hi:
        return 0.0, 0.0
    if lo > hi:
        v, e = integrate(f, hi, lo, quad, points=points, indicator=indicator)
        return -v, e
    value, error = [], []
    for a, b in _pieces(lo, hi, points):
        phi, jac, ua, ub = _transform(a, b)
        if indicator is None:
            h = lambda u, phi=phi, jac=jac: f(phi(u)) * jac(u)
            segs = [(ua, ub)]
        else:
            ind_u = lambda u, phi=phi: indicator(phi(u))
            h = lambda u, phi=phi, jac=jac: np.where(indicator(phi(u)), f(phi(u)) * jac(u), 0.0)
            segs = indicator_segments(ind_u, ua, ub, quad.probe_points)
        v, e = _adaptive(h, segs, quad)
        value.append(v)
        error.append(e)
    return math.fsum(value), math.fsum(error)


def _row_segments(indicator: Callable, xs: np.ndarray, a: np.ndarray, b: np.ndarray, probes: int):
    """True-segments of ``indicator(xs[i], .)`` inside ``[a[i], b[i]]`` for every i.

    Returns parallel arrays (row, lo, hi).  Each row gets its own probe grid
    scaled to its interval, so short intervals are probed as finely as long ones.
    """
    m = xs.size
    if m == 0:
        return np.empty(0, dtype=int), np.empty(0), np.empty(0)
    t = np.linspace(0.0, 1.0, max(probes, 2))
    grid = a[:, None] + (b - a)[:, None] * t[None, :]
    grid[:, -1] = np.nextafter(b, a)
    inside = np.asarray(indicator(np.broadcast_to(xs[:, None], grid.shape), grid), dtype=bool)
    rows, cols = np.nonzero(inside[:, 1:] != inside[:, :-1])
    if rows.size:
        xr = xs[rows]
        cuts = _bisect(lambda y: indicator(xr, y), grid[rows, cols], grid[rows, cols + 1], inside[rows, cols])
    else:
        cuts = np.empty(0)
    seg_row, seg_a, seg_b = [], [], []
    start = 0
    for i in range(m):
        stop = start
        while stop < rows.size and rows[stop] == i:
            stop += 1
        edges = [a[i], *cuts[start:stop].tolist(), b[i]]
        state = bool(inside[i, 0])
        for lo, hi in zip(edges[:-1], edges[1:]):
            if state and lo < hi:
                seg_row.append(i)
                seg_a.append(lo)
                seg_b.append(hi)
            state = not state
        start = stop
    return np.array(seg_row, dtype=int), np.array(seg_a, dtype=float), np.array(seg_b, dtype=float)


def inner_integrals(f: Callable, indicator: Callable, xs: np.ndarray, ylo: float, yhi: float,
                    quad: Quadrature = DEFAULT, max_levels: int = 60,
                    support: Callable | None = None) -> np.ndarray:
    """For every ``x`` in ``xs``, integrate ``f(x, y)`` over ``y`` in ``[ylo, yhi]``
    where ``indicator(x, y)`` holds.  All rows are processed together.

    With ``support`` given, its segments are located first and ``indicator``
    is then probed inside each of them, which resolves events on thin slices
    of the support.
    """
    xs = np.asarray(xs, dtype=float)
    n, p = xs.size, quad.probe_points
    full_a, full_b = np.full(n, float(ylo)), np.full(n, float(yhi))
    if support is None:
        seg_row, seg_a, seg_b = _row_segments(indicator, xs, full_a, full_b, p)
        mask = indicator
    else:
        rows0, a0, b0 = _row_segments(support, xs, full_a, full_b, p)
        sub_row, seg_a, seg_b = _row_segments(indicator, xs[rows0], a0, b0, p)
        seg_row = rows0[sub_row]
        mask = lambda x, y: np.asarray(support(x, y), dtype=bool) & np.asarray(indicator(x, y), dtype=bool)
    out = np.zeros(n)
    span = yhi - ylo
    local_tol = 1e-2 * quad.abs_tol
    for _ in range(max_levels):
        if seg_row.size == 0:
            return out
        c = 0.5 * (seg_a + seg_b)
        r = 0.5 * (seg_b - seg_a)
        y = c[:, None] + r[:, None] * NODES[None, :]
        x = np.broadcast_to(xs[seg_row][:, None], y.shape)
        with np.errstate(all="ignore"):
            fx = np.where(mask(x, y), f(x, y), 0.0)
        if not np.all(np.isfinite(fx)):
            raise IntegrationError("integrand is not finite on the integration range")
        k = r * (fx @ KRONROD)
        e = np.abs(k - r * (fx @ GAUSS))
        done = e <= np.maximum(local_tol, quad.rel_tol * 1e-2 * np.abs(k)) * (2 * r) / span
        done |= r <= 1e-15 * span
        np.add.at(out, seg_row[done], k[done])
        keep = ~done
        mid = c[keep]
        seg_row = np.concatenate([seg_row[keep], seg_row[keep]])
        seg_a, seg_b = np.concatenate([seg_a[keep], mid]), np.concatenate([mid, seg_b[keep]])
    raise IntegrationError("inner integral did not converge")


def integrate2d(f: Callable, indicator: Callable, box, quad: Quadrature = DEFAULT,
                support: Callable | None = None) -> tuple[float, float]:
    """Iterated integral of ``f(x, y)`` over the set ``indicator`` within a finite box.

    ``support``, when given, is an outer set (typically where a density is
    positive) inside which ``indicator`` is resolved; see :func:`inner_integrals`.
    """
    (xlo, xhi), (ylo, yhi) = box
    if not (xlo < xhi and ylo < yhi):
        return 0.0, 0.0
    if not all(math.isfinite(v) for v in (xlo, xhi, ylo, yhi)):
        raise IntegrationError("two-dimensional integration needs a finite box")
    g = lambda xs: inner_integrals(f, indicator, xs, ylo, yhi, quad, support=support)
    return integrate(g, xlo, xhi, quad)
