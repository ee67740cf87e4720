"""Random attracting and repelling points and the stationary measure."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..circle import (CirclePoint, circular_mean, dist, dist_array, max_pairwise_dist,
                      set_diameter, wrap_array)
from ..engine import NuMeasure, OmegaStream, compose_lanes, stream_keys
from ..errors import HypothesisViolation, NonConvergence
from .._search import golden_section_max
from .measure import ArgmaxSet, EmpiricalMeasure, PointEstimate

# irrational offset keeps probe grids away from rational fixed points such as 1/2
PROBE_OFFSET = 0.381966


def probe_points(probes: int) -> np.ndarray:
    return (np.arange(probes) + PROBE_OFFSET) / probes


def _limit_point(nu, omega, n, probes, tol, order, what):
    if probes < 2:
        raise ValueError("probes must be >= 2")
    x, _ = compose_lanes(nu, omega.key, omega.offset, probe_points(probes), n, order)
    spread = max_pairwise_dist(x)
    est = PointEstimate(CirclePoint(circular_mean(x)), spread, probes)
    if not spread <= tol:
        raise NonConvergence(
            f"{what} estimate did not converge: probe spread {spread:.3g} > tol {tol:.3g} "
            f"at n={n} (n too small, or no synchronization)", estimate=est)
    return est


def estimate_pi(nu: NuMeasure, omega: OmegaStream, n: int, probes: int = 16,
                tol: float = 1e-8) -> PointEstimate:
    """Attracting point ``pi(omega)`` as the common limit of ``f_1 o ... o f_n``."""
    return _limit_point(nu, omega, n, probes, tol, "reversed", "pi")


def estimate_theta(nu: NuMeasure, omega: OmegaStream, n: int, probes: int = 16,
                   tol: float = 1e-8) -> PointEstimate:
    """Repelling point ``theta(omega)`` as the limit of ``f_1^-1 o ... o f_n^-1``."""
    return _limit_point(nu, omega, n, probes, tol, "backward", "theta")


def _argmax_set(z, ld, order, nu, omega, n, refine) -> ArgmaxSet:
    grid = z.size
    h = 1.0 / grid
    b = int(np.argmax(ld))
    best = float(ld[b])
    atol = 1e-9 * max(1.0, abs(best))
    points = [float(z[b])]
    value = best
    if refine:
        def f(t):
            return float(compose_lanes(nu, omega.key, omega.offset, [t], n, order, threads=1)[1][0])

        t, v = golden_section_max(f, float(z[b]) - h, float(z[b]) + h, tol=1e-14)
        if v > best:
            points = [float(wrap_array(t))]
            value = v
            atol = 1e-9 * max(1.0, abs(value))
    near = np.flatnonzero(ld >= value - atol)
    tied = [float(z[i]) for i in near if float(z[i]) != points[0]]
    all_pts = points + tied
    diam = set_diameter(all_pts)
    return ArgmaxSet(tuple(CirclePoint(p) for p in all_pts), value, h, diam > 10.0 * h)


def estimate_theta_argmax(nu: NuMeasure, omega: OmegaStream, n: int, grid: int = 2048,
                          refine: bool = True) -> ArgmaxSet:
    """Maximisers of ``log|(f^n_omega)'|``: grid scan then golden-section refinement.

    ``attained_value / n`` estimates ``Lambda(nu)``; the maximiser tends to
    ``theta(omega)``.
    """
    if grid < 16:
        raise ValueError("grid must be >= 16")
    z = np.arange(grid) / grid
    _, ld = compose_lanes(nu, omega.key, omega.offset, z, n, "forward")
    return _argmax_set(z, ld, "forward", nu, omega, n, refine)


def reversed_argmax(nu: NuMeasure, omega: OmegaStream, n: int, grid: int = 4096):
    """Grid values of ``log|(f-bar^n_omega)'|`` and the argmax set ``M-bar_n``."""
    z = np.arange(grid) / grid
    _, ld = compose_lanes(nu, omega.key, omega.offset, z, n, "reversed")
    return z, ld, _argmax_set(z, ld, "reversed", nu, omega, n, refine=False)


def sample_stationary(nu: NuMeasure, n: int, n_samples: int, seed: int, x0: float = 0.0,
                      tol: float = 1e-8, check: bool = True,
                      threads: int | None = None) -> EmpiricalMeasure:
    """Draw ``n_samples`` points of the stationary measure as ``f-bar^n_omega(x0)``.

    Every sample uses its own stream ``stream_key(seed, i)``. With ``check``
    each stream is also run from a second start; lanes where the two
    endpoints differ by more than ``tol`` are counted in
    ``meta['nonconverged']`` and reported with a warning.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    keys = stream_keys(seed, n_samples)
    x, _ = compose_lanes(nu, keys, 0, np.full(n_samples, float(x0)), n, "reversed", threads)
    bad = 0
    if check:
        x2, _ = compose_lanes(nu, keys, 0, np.full(n_samples, float(x0) + PROBE_OFFSET), n,
                              "reversed", threads)
        bad = int(np.count_nonzero(dist_array(x, x2) > tol))
        if bad:
            warnings.warn(f"{bad} of {n_samples} stationary samples not converged at n={n}",
                          RuntimeWarning, stacklevel=2)
    meta = {"n_steps": n, "n_samples": n_samples, "seed": seed, "x0": float(x0),
            "nonconverged": bad}
    return EmpiricalMeasure(x, meta)


def equivariance_residuals(nu: NuMeasure, omega: OmegaStream, n_check: int = 1,
                           n_est: int = 400, probes: int = 16, tol: float = 1e-8):
    """Worst residuals of ``f_1(pi(sigma omega)) = pi(omega)`` and
    ``f_1(theta(omega)) = theta(sigma omega)`` over the shifts ``sigma^k omega``,
    ``k < n_check``.
    """
    pi_res = 0.0
    theta_res = 0.0
    pis = [estimate_pi(nu, omega.shifted(k), n_est, probes, tol).point for k in range(n_check + 1)]
    thetas = [estimate_theta(nu, omega.shifted(k), n_est, probes, tol).point
              for k in range(n_check + 1)]
    for k in range(n_check):
        f = nu.atoms[omega.shifted(k).index(1)]
        pi_res = max(pi_res, dist(f(pis[k + 1].value), pis[k]))
        theta_res = max(theta_res, dist(f(thetas[k].value), thetas[k + 1]))
    return pi_res, theta_res


def _logsumexp_cumulative(v: np.ndarray) -> np.ndarray:
    return np.logaddexp.accumulate(v)


def pi_attraction_rate(nu: NuMeasure, omega: OmegaStream, delta: float, n: int,
                       grid: int = 4096, probes: int = 16, tol: float = 1e-8,
                       require_hypotheses: bool = True, hypotheses=None) -> float:
    """``sup (1/n) log d(f-bar^n_omega(x), pi(omega))`` over grid points ``x`` at
    distance at least ``delta`` from ``M-bar_n(omega)``.

    The distances are far below double precision at large ``n``, so they are
    not formed by subtraction. Writing ``pi(omega) = f-bar^n_omega(p)`` with
    ``p = pi(sigma^n omega)``, the distance is the length of the image of the
    arc between ``p`` and ``x`` that avoids ``M-bar_n``, i.e. the integral of
    ``|(f-bar^n)'|`` over it, evaluated in log space on the grid.
    """
    if not 0.0 < delta < 0.25:
        raise ValueError("delta must lie in (0, 1/4)")
    if require_hypotheses:
        if hypotheses is None:
            from ..diagnostics import check_hypotheses

            hypotheses = check_hypotheses(nu)
        if not hypotheses.passed:
            raise HypothesisViolation(
                "pi_attraction_rate refused: " + "; ".join(hypotheses.reasons), hypotheses)
    p = estimate_pi(nu, omega.shifted(n), n, probes, tol).point.value
    z, ld, mset = reversed_argmax(nu, omega, n, grid)
    h = 1.0 / grid
    m_pts = np.array([q.value for q in mset.points])
    # log-derivative at p itself, for the half cell next to it
    _, ldp = compose_lanes(nu, omega.key, omega.offset, [p], n, "reversed", threads=1)
    u = wrap_array(z - p)
    um = float(wrap_array(m_pts[0] - p))
    order = np.argsort(u, kind="stable")
    us = u[order]
    ls = ld[order] + math.log(h)
    head = float(ldp[0]) + math.log(0.5 * h)
    fwd = np.logaddexp(head, _logsumexp_cumulative(ls))             # arc p -> x, positive sense
    bwd = np.logaddexp(head, _logsumexp_cumulative(ls[::-1]))[::-1]  # arc x -> p, negative sense
    log_len = np.where(us < um, fwd, bwd)
    # the image of the avoiding arc is the short side unless it covers over half the circle
    big = log_len > math.log(0.5)
    with np.errstate(divide="ignore"):
        log_d = np.where(big, np.log1p(-np.exp(np.minimum(log_len, 0.0))), log_len)
    d_m = np.min(dist_array(us[:, None] + p, m_pts[None, :]), axis=1)
    ok = d_m >= delta
    if not ok.any():
        raise ValueError("no grid point lies at distance >= delta from the argmax set")
    return float(np.max(log_d[ok]) / n)
