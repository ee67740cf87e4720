"""Numpy implementation of the orbit kernels.

This is the fallback used when the compiled extension is unavailable, and the
reference the compiled kernels are tested against. Both expose the same two
entry points:

``compose(kinds, params, cdf, keys, offsets, x0, n, reverse, invert, trace)``
    Apply ``n`` random maps to every lane. Lane ``i`` reads atom indices from
    the stream ``keys[i]`` at positions ``offsets[i] + j``; step ``k`` uses
    ``j = n - k`` when ``reverse`` else ``j = k + 1``, and applies the inverse
    map when ``invert``. Returns the final points and the accumulated
    ``log|derivative|`` (optionally the full trace).

``track_pair(kinds, params, orient, cdf, keys, offsets, x0, y0, n, collapse_tol, linear_tol)``
    Follow the two arcs ``[x0, y0]`` and ``[y0, x0]`` under the forward
    composition. Returns the first step at which the shorter arc drops below
    ``collapse_tol`` (or -1), the final log-separation, and the minimum
    separation seen. Once the separation falls below ``linear_tol`` the pair
    is followed through the derivative along one orbit, so log-separations
    far below double precision remain meaningful.
"""
from __future__ import annotations

import numpy as np

from . import maps
from .circle import wrap_array

KERNEL_NAME = "numpy"

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    z = np.asarray(keys, dtype=np.uint64) + np.asarray(counters).astype(np.uint64) * _GAMMA
    return (mix64(z) >> _S11).astype(np.float64) * _INV53


def draw(keys, counters, cdf) -> np.ndarray:
    """Atom indices by inverse CDF; index = number of cdf[:-1] entries <= u."""
    u = uniforms(keys, counters)
    return np.searchsorted(np.asarray(cdf)[:-1], u, side="right")


def apply_atoms(kinds, params, idx, x, invert):
    """Apply atom ``idx[i]`` (or its inverse) to ``x[i]``; returns (y, logd)."""
    kinds = np.asarray(kinds)
    lane_kind = kinds[idx]
    y = np.empty_like(x)
    ld = np.empty_like(x)
    for kind in np.unique(lane_kind):
        sel = lane_kind == kind
        whole = bool(sel.all())
        xs = x if whole else x[sel]
        p = params[idx] if whole else params[idx[sel]]
        if kind == maps.PROJECTIVE:
            if invert:
                ys, ls = maps.projective_apply(p[:, 4], p[:, 5], p[:, 6], p[:, 7], -p[:, 8], xs)
            else:
                ys, ls = maps.projective_apply(p[:, 0], p[:, 1], p[:, 2], p[:, 3], p[:, 8], xs)
        elif kind == maps.SINE:
            f = maps.sine_inverse_apply if invert else maps.sine_apply
            ys, ls = f(p[:, 0], p[:, 1], xs)
        elif kind == maps.SINE_INVERSE:
            f = maps.sine_apply if invert else maps.sine_inverse_apply
            ys, ls = f(p[:, 0], p[:, 1], xs)
        elif kind == maps.ROTATION:
            ys, ls = maps.rotation_apply(-p[:, 0] if invert else p[:, 0], xs)
        else:
            raise ValueError(f"unknown kernel kind {kind}")
        if whole:
            return ys, ls
        y[sel] = ys
        ld[sel] = ls
    return y, ld


def compose(kinds, params, cdf, keys, offsets, x0, n, reverse=False, invert=False, trace=False):
    x = np.array(x0, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    logd = np.zeros_like(x)
    if trace:
        pts = np.empty((n + 1, x.size))
        sums = np.empty((n + 1, x.size))
        pts[0] = x
        sums[0] = 0.0
    for k in range(n):
        j = n - k if reverse else k + 1
        idx = draw(keys, offsets + j, cdf)
        x, ld = apply_atoms(kinds, params, idx, x, invert)
        logd = logd + ld
        if trace:
            pts[k + 1] = x
            sums[k + 1] = logd
    if trace:
        return x, logd, pts, sums
    return x, logd


def track_pair(kinds, params, orient, cdf, keys, offsets, x0, y0, n, collapse_tol, linear_tol):
    s = np.array(x0, dtype=np.float64)
    e = np.array(y0, dtype=np.float64)
    orient = np.asarray(orient)
    offsets = np.asarray(offsets, dtype=np.int64)
    lanes = s.size
    collapse = np.full(lanes, -1, dtype=np.int64)
    logsep = np.zeros(lanes)
    min_sep = np.minimum(wrap_array(e - s), wrap_array(s - e))
    linear = np.zeros(lanes, dtype=bool)
    for k in range(n):
        idx = draw(keys, offsets + (k + 1), cdf)
        lin = linear.copy()
        if lin.any():
            sl, ll = apply_atoms(kinds, params, idx[lin], s[lin], False)
            s[lin] = sl
            logsep[lin] += ll
            min_sep[lin] = np.minimum(min_sep[lin], np.exp(logsep[lin]))
        act = ~lin
        if act.any():
            ia = idx[act]
            fs, _ = apply_atoms(kinds, params, ia, s[act], False)
            fe, _ = apply_atoms(kinds, params, ia, e[act], False)
            rev = orient[ia] < 0
            ns = np.where(rev, fe, fs)
            ne = np.where(rev, fs, fe)
            d = np.minimum(wrap_array(ne - ns), wrap_array(ns - ne))
            s[act] = ns
            e[act] = ne
            ms = min_sep[act]
            min_sep[act] = np.minimum(ms, d)
            cs = collapse[act]
            collapse[act] = np.where((cs < 0) & (d < collapse_tol), k + 1, cs)
            go = d < linear_tol
            if go.any():
                where = np.flatnonzero(act)[go]
                linear[where] = True
                logsep[where] = np.log(np.maximum(d[go], np.finfo(float).tiny))
    done = ~linear
    sep = np.minimum(wrap_array(e - s), wrap_array(s - e))
    logsep[done] = np.log(np.maximum(sep[done], np.finfo(float).tiny))
    return collapse, logsep, min_sep
