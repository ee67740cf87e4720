# cython: language_level=3
"""Compiled orbit kernels; same contract as ``circlerds._pykernels``."""
import numpy as np

from libc.math cimport atan2, cos, sin, exp, log, log1p, floor, fabs, fmod, rint, M_PI
from libc.stdint cimport uint64_t, int64_t

KERNEL_NAME = "cython"

cdef enum:
    PROJECTIVE = 0
    SINE = 1
    ROTATION = 2
    SINE_INVERSE = 3
    BISECTION_STEPS = 8
    NEWTON_MAX = 50

cdef double NEWTON_TOL = 1e-14

cdef double TWO_PI = 2.0 * M_PI
cdef double TINY = 2.2250738585072014e-308


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int draw(uint64_t key, int64_t counter, const double* cdf, int k) noexcept nogil:
    cdef uint64_t z = key + (<uint64_t>counter) * <uint64_t>0x9E3779B97F4A7C15ULL
    cdef double u = <double>(mix64(z) >> 11) * 1.1102230246251565e-16
    cdef int i = 0
    while i < k - 1 and cdf[i] <= u:
        i += 1
    return i


cdef inline double wrap(double r) noexcept nogil:
    cdef double v = r - floor(r)
    if v >= 1.0:
        return 0.0
    return v


cdef inline double sine_root(double a, double b, double y, int* failed) noexcept nogil:
    cdef double c = b / TWO_PI
    cdef double half = fabs(c)
    cdef double lo = y - a - half
    cdef double hi = y - a + half
    cdef double mid, g, step, x
    cdef int it
    for it in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        g = mid + a + c * sin(TWO_PI * mid) - y
        if g > 0.0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for it in range(NEWTON_MAX):
        g = x + a + c * sin(TWO_PI * x) - y
        step = g / (1.0 + b * cos(TWO_PI * x))
        x = x - step
        if fabs(step) < NEWTON_TOL:
            return x
    failed[0] = 1
    return x


cdef inline double apply_one(int kind, const double* p, bint invert, double x,
                             double* logd, int* failed) noexcept nogil:
    cdef double phi, c, s, u, w, t, r, k
    if kind == PROJECTIVE:
        # exact at multiples of 1/2, see maps.sincospi
        k = rint(2.0 * x)
        phi = M_PI * (x - 0.5 * k)
        if fmod(k, 2.0) == 1.0:
            c = -sin(phi)
            s = cos(phi)
        else:
            c = cos(phi)
            s = sin(phi)
        if invert:
            u = p[4] * c + p[5] * s
            w = p[6] * c + p[7] * s
            logd[0] = -p[8] - log(u * u + w * w)
        else:
            u = p[0] * c + p[1] * s
            w = p[2] * c + p[3] * s
            logd[0] = p[8] - log(u * u + w * w)
        return wrap(atan2(w, u) / M_PI)
    if kind == ROTATION:
        logd[0] = 0.0
        if invert:
            return wrap(x - p[0])
        return wrap(x + p[0])
    if (kind == SINE and not invert) or (kind == SINE_INVERSE and invert):
        t = TWO_PI * x
        logd[0] = log1p(p[1] * cos(t))
        return wrap(x + p[0] + (p[1] / TWO_PI) * sin(t))
    r = sine_root(p[0], p[1], x, failed)
    logd[0] = -log1p(p[1] * cos(TWO_PI * r))
    return wrap(r)


def compose(kinds, params, cdf, keys, offsets, x0, long n, bint reverse=False,
            bint invert=False, bint trace=False):
    cdef const long[:] kv = np.ascontiguousarray(kinds, dtype=np.int_)
    cdef const double[:, ::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const uint64_t[::1] keyv = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef const int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    xa = np.array(x0, dtype=np.float64).ravel()
    la = np.zeros_like(xa)
    cdef double[::1] xv = xa
    cdef double[::1] lv = la
    cdef Py_ssize_t lanes = xa.shape[0]
    cdef int natoms = cv.shape[0]
    cdef double[:, ::1] tp
    cdef double[:, ::1] ts
    if trace:
        tpa = np.empty((n + 1, lanes))
        tsa = np.empty((n + 1, lanes))
        tp = tpa
        ts = tsa
    cdef Py_ssize_t i
    cdef long k
    cdef int64_t j
    cdef int idx
    cdef int failed = 0
    cdef double x, acc, ld
    with nogil:
        for i in range(lanes):
            x = xv[i]
            acc = 0.0
            if trace:
                tp[0, i] = x
                ts[0, i] = 0.0
            for k in range(n):
                j = n - k if reverse else k + 1
                idx = draw(keyv[i], offv[i] + j, &cv[0], natoms)
                x = apply_one(<int>kv[idx], &pv[idx, 0], invert, x, &ld, &failed)
                acc = acc + ld
                if trace:
                    tp[k + 1, i] = x
                    ts[k + 1, i] = acc
            xv[i] = x
            lv[i] = acc
    if failed:
        raise RuntimeError("SineDiffeo inversion did not converge")
    if trace:
        return xa, la, tpa, tsa
    return xa, la


def track_pair(kinds, params, orient, cdf, keys, offsets, x0, y0, long n,
               double collapse_tol, double linear_tol):
    cdef const long[:] kv = np.ascontiguousarray(kinds, dtype=np.int_)
    cdef const double[:, ::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const long[:] ov = np.ascontiguousarray(orient, dtype=np.int_)
    cdef const double[::1] cv = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const uint64_t[::1] keyv = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef const int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    sa = np.array(x0, dtype=np.float64).ravel()
    ea = np.array(y0, dtype=np.float64).ravel()
    cdef double[::1] sv = sa
    cdef double[::1] ev = ea
    cdef Py_ssize_t lanes = sa.shape[0]
    ca = np.full(lanes, -1, dtype=np.int64)
    la = np.zeros(lanes)
    ma = np.zeros(lanes)
    cdef int64_t[::1] colv = ca
    cdef double[::1] lsv = la
    cdef double[::1] msv = ma
    cdef int natoms = cv.shape[0]
    cdef Py_ssize_t i
    cdef long k
    cdef int idx, failed = 0
    cdef bint linear
    cdef double s, e, fs, fe, d, d1, d2, ld, logsep, min_sep, sep
    with nogil:
        for i in range(lanes):
            s = sv[i]
            e = ev[i]
            d1 = wrap(e - s)
            d2 = wrap(s - e)
            min_sep = d1 if d1 < d2 else d2
            linear = False
            logsep = 0.0
            for k in range(n):
                idx = draw(keyv[i], offv[i] + k + 1, &cv[0], natoms)
                if linear:
                    s = apply_one(<int>kv[idx], &pv[idx, 0], False, s, &ld, &failed)
                    logsep = logsep + ld
                    d = exp(logsep)
                    if d < min_sep:
                        min_sep = d
                    continue
                fs = apply_one(<int>kv[idx], &pv[idx, 0], False, s, &ld, &failed)
                fe = apply_one(<int>kv[idx], &pv[idx, 0], False, e, &ld, &failed)
                if ov[idx] < 0:
                    s = fe
                    e = fs
                else:
                    s = fs
                    e = fe
                d1 = wrap(e - s)
                d2 = wrap(s - e)
                d = d1 if d1 < d2 else d2
                if d < min_sep:
                    min_sep = d
                if colv[i] < 0 and d < collapse_tol:
                    colv[i] = k + 1
                if d < linear_tol:
                    linear = True
                    logsep = log(d if d > TINY else TINY)
            if not linear:
                d1 = wrap(e - s)
                d2 = wrap(s - e)
                sep = d1 if d1 < d2 else d2
                logsep = log(sep if sep > TINY else TINY)
            lsv[i] = logsep
            msv[i] = min_sep
            sv[i] = s
            ev[i] = e
    if failed:
        raise RuntimeError("SineDiffeo inversion did not converge")
    return ca, la, ma
