"""Small scalar search helpers."""
from __future__ import annotations

import math

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(func, a: float, b: float, tol: float = 1e-13, maxiter: int = 200):
    """Maximise a unimodal ``func`` on ``[a, b]``; returns ``(x, func(x))``.

    Stops once the bracket is shorter than ``tol``. The best point ever
    evaluated is returned, so a non-unimodal function still yields a point
    no worse than the bracket ends.
    """
    if b < a:
        a, b = b, a
    fa, fb = func(a), func(b)
    best_x, best_f = (a, fa) if fa >= fb else (b, fb)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = func(d)
    for x, f in ((c, fc), (d, fd)):
        if f > best_f:
            best_x, best_f = x, f
    return best_x, best_f


def golden_section_min(func, a: float, b: float, tol: float = 1e-13, maxiter: int = 200):
    x, f = golden_section_max(lambda t: -func(t), a, b, tol, maxiter)
    return x, -f
