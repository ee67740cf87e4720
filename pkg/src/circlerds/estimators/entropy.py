"""Furstenberg entropy by ball ratios, and the telescoping identity behind it."""
from __future__ import annotations

import math

import numpy as np

from ..circle import Arc, dist_array, map_arc, wrap_array
from ..engine import NuMeasure
from ..errors import DegenerateBall
from .measure import EmpiricalMeasure, EstimateReport, mean_and_stderr

MAX_DEGENERATE_FRACTION = 0.01


def preimage_arc_params(f, y, r):
    """Start and length of the arcs ``f^{-1} B(y, r)`` (vectorised over ``y``)."""
    lo = np.asarray(f.eval_inverse(wrap_array(y - r)), dtype=float)
    hi = np.asarray(f.eval_inverse(wrap_array(y + r)), dtype=float)
    if f.orientation > 0:
        return lo, wrap_array(hi - lo)
    return hi, wrap_array(lo - hi)


def auto_radius(eta: EmpiricalMeasure, target_count: int = 100, probes: int = 512,
                seed: int = 0) -> float:
    """Radius at which the median ball around eta-typical points holds ``target_count`` samples."""
    rng = np.random.default_rng(seed)
    x = eta.samples[rng.integers(0, eta.count, min(probes, eta.count))]
    r = float(np.median(eta.knn_radius(x, target_count)))
    return min(max(r, 1e-300), 0.49)


def _log_ratios(nu, eta, x, atom, r, leave_one_out):
    y = np.empty_like(x)
    num = np.empty(x.size, dtype=np.int64)
    for k, f in enumerate(nu.atoms):
        sel = atom == k
        if not sel.any():
            continue
        y[sel] = np.asarray(f.eval(x[sel]), dtype=float)
        start, length = preimage_arc_params(f, y[sel], r)
        num[sel] = eta.arc_counts(start, length)
    den = eta.ball_counts(y, r)
    if leave_one_out:
        # x lies in f^{-1} B(f x, r) by construction, and in B(f x, r) when close to it
        num = num - 1
        den = den - (dist_array(x, y) <= r)
    ok = (num > 0) & (den > 0)
    return np.log(np.where(ok, num, 1)) - np.log(np.where(ok, den, 1)), ok, den


def furstenberg_entropy(nu: NuMeasure, eta: EmpiricalMeasure, radius: float | None = None,
                        mc_draws: int = 20000, seed: int = 0, leave_one_out: bool = True,
                        target_count: int = 100, drift: bool = True) -> EstimateReport:
    """``h_F = int log (d f_* eta / d eta)(f x) d(eta x nu)`` by ball ratios.

    The Radon-Nikodym derivative at ``y = f(x)`` is estimated by
    ``eta(f^{-1} B(y, r)) / eta(B(y, r))`` with the preimage arc obtained by
    inverting the ball endpoints. ``leave_one_out`` drops the drawn sample
    itself from both counts, which removes the upward bias of counting ``x``
    in its own preimage ball. ``radius=None`` picks ``r`` so that the median
    ball holds ``target_count`` samples; with ``drift`` the estimate is
    repeated at ``r/2`` and the change reported.
    """
    if radius is None:
        radius = auto_radius(eta, target_count, seed=seed)
    if not 0.0 < radius < 0.5:
        raise ValueError("radius must lie in (0, 1/2)")
    rng = np.random.default_rng(seed)
    x = eta.samples[rng.integers(0, eta.count, mc_draws)]
    atom = rng.choice(len(nu.atoms), size=mc_draws, p=np.asarray(nu.probs))

    def estimate(r):
        lr, ok, den = _log_ratios(nu, eta, x, atom, r, leave_one_out)
        bad = 1.0 - ok.mean()
        if bad > MAX_DEGENERATE_FRACTION:
            raise DegenerateBall(
                f"{bad:.1%} of entropy draws hit an empty ball at r={r:.3g} "
                f"(count={eta.count}); increase the radius or the sample size")
        v, se, sd = mean_and_stderr(lr[ok])
        return v, se, sd, float(bad), float(np.median(den)) / eta.count

    v, se, sd, bad, med = estimate(radius)
    diag = {
        "radius": radius,
        "median_ball_mass": med,
        "median_ball_count": med * eta.count,
        "degenerate_fraction": bad,
        "leave_one_out": leave_one_out,
        "sd": sd,
    }
    if med * eta.count < 10:
        diag["warning"] = "typical ball holds fewer than 10 samples"
    if drift:
        try:
            v2 = estimate(radius / 2)[0]
            diag["value_half_radius"] = v2
            diag["drift_half_radius"] = v2 - v
        except DegenerateBall:
            diag["drift_half_radius"] = None
    return EstimateReport(v, se, 0, mc_draws, 0, seed, diag)


def preimage_arc(f, arc: Arc) -> Arc:
    """``f^{-1}(arc)`` from the inverted endpoints and the orientation of ``f``."""
    if arc.length == 0.0:
        p = f.eval_inverse(arc.start.value)
        return Arc(p, p)
    return map_arc(arc, f.eval_inverse(arc.start.value), f.eval_inverse(arc.end.value),
                   f.orientation)


def telescoping_residual(eta: EmpiricalMeasure, maps, I0: Arc) -> float:
    """Absolute difference of the two sides of

    ``-log eta(I_0) = -log eta(I_N) + sum_n log (f_n)_* eta(I_{n-1}) / eta(I_{n-1})``

    with ``I_n = (f_1 o ... o f_n)^{-1} I_0``. Each pushforward mass
    ``(f_n)_* eta(I_{n-1}) = eta(f_n^{-1} I_{n-1})`` is counted on the exact
    preimage arc, so the identity holds for any measure up to rounding.
    """
    def mass(arc):
        m = eta.arc_mass(arc)
        if m == 0.0:
            raise DegenerateBall(f"empirical mass of {arc} is zero")
        return m

    arc = I0
    lhs = -math.log(mass(I0))
    acc = 0.0
    for f in maps:
        prev = mass(arc)
        arc = preimage_arc(f, arc)
        acc += math.log(mass(arc)) - math.log(prev)
    rhs = -math.log(mass(arc)) + acc
    return abs(lhs - rhs)
