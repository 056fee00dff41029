"""Float hot loops: batched orbit simulation and shrinking-cell derivative ratios.

Each kernel has a numba version (scalar loops, ``nogil`` so threads overlap)
and a numpy version (vectorized).  :func:`pwlsds._accel.resolve_backend`
picks one; both follow ``np.interp`` arithmetic so short runs agree to the
last bit.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from ._accel import njit, resolve_backend


class MapTable(NamedTuple):
    bp: np.ndarray  # (M, K) breakpoints, padded with 1.0
    vals: np.ndarray  # (M, K) values, padded with the last value
    npts: np.ndarray  # (M,) number of real points per map


class CdfTable(NamedTuple):
    kind: int  # 0 = piecewise-linear knots, 1 = increasing affine IFS
    kx: np.ndarray
    kf: np.ndarray
    s: np.ndarray
    t: np.ndarray
    w: np.ndarray
    scale: float


def pack_maps(maps: Sequence) -> MapTable:
    K = max(len(g.breakpoints) for g in maps)
    bp = np.ones((len(maps), K))
    vals = np.zeros((len(maps), K))
    npts = np.zeros(len(maps), dtype=np.int64)
    for i, g in enumerate(maps):
        n = len(g.breakpoints)
        bp[i, :n] = [float(b) for b in g.breakpoints]
        vals[i, :n] = [float(v) for v in g.values]
        vals[i, n:] = vals[i, n - 1]
        npts[i] = n
    return MapTable(bp, vals, npts)


def pack_cdf(enc) -> CdfTable:
    empty = np.zeros(1)
    if enc[0] == "knots":
        return CdfTable(0, np.asarray(enc[1], float), np.asarray(enc[2], float), empty, empty, empty, 1.0)
    if enc[0] == "ifs":
        _, s, t, w, scale = enc
        return CdfTable(1, empty, empty, np.asarray(s, float), np.asarray(t, float), np.asarray(w, float), float(scale))
    raise ValueError(f"unknown CDF encoding {enc[0]!r}")


# ---------------------------------------------------------------------------
# scalar helpers (compiled when numba is on)


@njit(nogil=True, cache=False)
def _interp1(x, xp, fp, n):
    if x <= xp[0]:
        return fp[0]
    if x >= xp[n - 1]:
        return fp[n - 1]
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if xp[mid] <= x:
            lo = mid
        else:
            hi = mid
    if x == xp[lo]:
        return fp[lo]
    slope = (fp[lo + 1] - fp[lo]) / (xp[lo + 1] - xp[lo])
    return slope * (x - xp[lo]) + fp[lo]


@njit(nogil=True, cache=False)
def _ifs_cdf1(x, s, t, w, scale):
    acc = 0.0
    sc = scale
    for _ in range(200):
        if x <= 0.0:
            return acc
        if x >= 1.0:
            return acc + sc
        below = 0.0
        hit = -1
        for j in range(s.shape[0]):
            if x > t[j] + s[j]:
                below += w[j]
            elif x >= t[j]:
                hit = j
                break
            else:
                break
        acc += sc * below
        if hit < 0:
            return acc
        x = (x - t[hit]) / s[hit]
        sc *= w[hit]
        if sc < 1e-300:
            break
    return acc


@njit(nogil=True, cache=False)
def _cdf1(x, kind, kx, kf, s, t, w, scale):
    if kind == 0:
        return _interp1(x, kx, kf, kx.shape[0])
    return _ifs_cdf1(x, s, t, w, scale)


@njit(nogil=True, cache=False)
def _image1(a, b, xp, fp, n):
    ya = _interp1(a, xp, fp, n)
    yb = _interp1(b, xp, fp, n)
    lo = min(ya, yb)
    hi = max(ya, yb)
    for j in range(1, n - 1):
        if a < xp[j] and xp[j] < b:
            lo = min(lo, fp[j])
            hi = max(hi, fp[j])
    return lo, hi


# ---------------------------------------------------------------------------
# orbit kernel


@njit(nogil=True, cache=False)
def _orbits_nb(bp, vals, npts, choices, x0, out):
    R, n = choices.shape
    for r in range(R):
        x = x0[r]
        out[r, 0] = x
        for k in range(n):
            m = choices[r, k]
            x = _interp1(x, bp[m], vals[m], npts[m])
            out[r, k + 1] = x
    return out


def _orbits_np(bp, vals, npts, choices, x0, out):
    x = x0.astype(float).copy()
    out[:, 0] = x
    M = bp.shape[0]
    for k in range(choices.shape[1]):
        c = choices[:, k]
        for m in range(M):
            sel = c == m
            if sel.any():
                n = npts[m]
                x[sel] = np.interp(x[sel], bp[m, :n], vals[m, :n])
        out[:, k + 1] = x
    return out


def float_orbits(table: MapTable, choices: np.ndarray, x0: np.ndarray, backend: str | None = None) -> np.ndarray:
    """States ``(R, n+1)`` for replica rows of map choices ``(R, n)``."""
    choices = np.ascontiguousarray(choices, dtype=np.int64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    out = np.empty((choices.shape[0], choices.shape[1] + 1))
    if resolve_backend(backend) == "numba":
        return _orbits_nb(table.bp, table.vals, table.npts, choices, x0, out)
    return _orbits_np(table.bp, table.vals, table.npts, choices, x0, out)


# ---------------------------------------------------------------------------
# derivative-ratio kernel


@njit(nogil=True, cache=False)
def _ratios_nb(bp, vals, npts, kind, kx, kf, s, t, w, scale, xs, ms, levels, out):
    for i in range(xs.shape[0]):
        x = xs[i]
        m = ms[i]
        out[i] = np.nan
        for lev in range(levels, -1, -1):
            h = 0.5**lev
            k = np.floor(x / h)
            if k * h >= 1.0:
                k -= 1.0
            a = k * h
            b = a + h
            nu_i = _cdf1(b, kind, kx, kf, s, t, w, scale) - _cdf1(a, kind, kx, kf, s, t, w, scale)
            if nu_i > 0.0:
                lo, hi = _image1(a, b, bp[m], vals[m], npts[m])
                nu_g = _cdf1(hi, kind, kx, kf, s, t, w, scale) - _cdf1(lo, kind, kx, kf, s, t, w, scale)
                out[i] = nu_g / nu_i
                break
    return out


def _ifs_cdf_np(x, s, t, w, scale):
    x = x.astype(float).copy()
    acc = np.zeros_like(x)
    sc = np.full_like(x, scale)
    live = np.ones(x.shape, bool)
    for _ in range(200):
        if not live.any():
            break
        lo_end = live & (x <= 0.0)
        live &= ~lo_end
        hi_end = live & (x >= 1.0)
        acc[hi_end] += sc[hi_end]
        live &= ~hi_end
        below = np.zeros_like(x)
        hit = np.full(x.shape, -1)
        undecided = live.copy()
        for j in range(s.shape[0]):
            right = undecided & (x > t[j] + s[j])
            below[right] += w[j]
            inside = undecided & ~right & (x >= t[j])
            hit[inside] = j
            undecided &= right
        acc[live] += sc[live] * below[live]
        live &= hit >= 0
        j = hit[live]
        x[live] = (x[live] - t[j]) / s[j]
        sc[live] *= w[j]
        live &= sc >= 1e-300
    return acc


def _cdf_np(x, c: CdfTable):
    if c.kind == 0:
        return np.interp(x, c.kx, c.kf)
    return _ifs_cdf_np(x, c.s, c.t, c.w, c.scale)


def _image_np(a, b, ms, table: MapTable):
    lo = np.empty_like(a)
    hi = np.empty_like(a)
    for m in range(table.bp.shape[0]):
        sel = ms == m
        if not sel.any():
            continue
        n = table.npts[m]
        xp, fp = table.bp[m, :n], table.vals[m, :n]
        ya, yb = np.interp(a[sel], xp, fp), np.interp(b[sel], xp, fp)
        l, h = np.minimum(ya, yb), np.maximum(ya, yb)
        for j in range(1, n - 1):
            inside = (a[sel] < xp[j]) & (xp[j] < b[sel])
            l = np.where(inside, np.minimum(l, fp[j]), l)
            h = np.where(inside, np.maximum(h, fp[j]), h)
        lo[sel], hi[sel] = l, h
    return lo, hi


def _ratios_np(table, cdf, xs, ms, levels):
    out = np.full(xs.shape, np.nan)
    todo = np.ones(xs.shape, bool)
    for lev in range(levels, -1, -1):
        if not todo.any():
            break
        h = 0.5**lev
        x = xs[todo]
        k = np.floor(x / h)
        k = np.where(k * h >= 1.0, k - 1.0, k)
        a = k * h
        b = a + h
        nu_i = _cdf_np(b, cdf) - _cdf_np(a, cdf)
        ok = nu_i > 0.0
        if ok.any():
            lo, hi = _image_np(a[ok], b[ok], ms[todo][ok], table)
            nu_g = _cdf_np(hi, cdf) - _cdf_np(lo, cdf)
            idx = np.flatnonzero(todo)[ok]
            out[idx] = nu_g / nu_i[ok]
            todo[idx] = False
    return out


def derivative_ratios(
    table: MapTable, cdf: CdfTable, states: np.ndarray, choices: np.ndarray, levels: int = 12, backend: str | None = None
) -> np.ndarray:
    """``ν(g(I))/ν(I)`` on the finest dyadic cell ``I ∋ x`` (level ≤ ``levels``) with ``ν(I) > 0``.

    ``nan`` marks points where every cell up to level 0 has zero mass.
    """
    xs = np.ascontiguousarray(states, dtype=np.float64)
    ms = np.ascontiguousarray(choices, dtype=np.int64)
    if resolve_backend(backend) == "numba":
        out = np.empty(xs.shape[0])
        return _ratios_nb(table.bp, table.vals, table.npts, cdf.kind, cdf.kx, cdf.kf, cdf.s, cdf.t, cdf.w, cdf.scale, xs, ms, levels, out)
    return _ratios_np(table, cdf, xs, ms, levels)


def cdf_values(cdf: CdfTable, xs: np.ndarray, backend: str | None = None) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if resolve_backend(backend) == "numba":
        return np.array([_cdf1(x, cdf.kind, cdf.kx, cdf.kf, cdf.s, cdf.t, cdf.w, cdf.scale) for x in xs])
    return _cdf_np(xs, cdf)
