"""Lyapunov exponents and synchronization."""
from __future__ import annotations

import math

import numpy as np

from ..circle import dist
from ..engine import NuMeasure, OmegaStream, compose_lanes, stream_keys, track_pairs
from .measure import EmpiricalMeasure, EstimateReport, ExponentPair, mean_and_stderr

COLLAPSE_TOL = 1e-6


def pointwise_exponent(nu: NuMeasure, omega: OmegaStream, x, n: int) -> float:
    """``(1/n) log|(f^n_omega)'(x)|``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _, ld = compose_lanes(nu, omega.key, omega.offset, [float(x)], n, "forward", threads=1)
    return float(ld[0]) / n


def pointwise_exponents(nu: NuMeasure, omega: OmegaStream, xs, n: int) -> np.ndarray:
    """Vectorised :func:`pointwise_exponent` over many starting points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _, ld = compose_lanes(nu, omega.key, omega.offset, np.asarray(xs, dtype=float), n, "forward")
    return ld / n


def extremal_exponents_kingman(nu: NuMeasure, n: int, n_samples: int, grid: int = 64,
                               seed: int = 0, threads: int | None = None) -> ExponentPair:
    """Grid estimates of ``lambda`` and ``Lambda`` from ``n``-step compositions.

    ``lambda``: grid minimum of ``(1/n) log|(f^n)'|``.
    ``Lambda``: ``sup |(f^n)'| = 1 / inf |((f^n)^{-1})'|``; the supremum is a
    spike of width about ``exp(-Lambda n)`` that no grid resolves, while the
    infimum of the inverse derivative is broad, so ``Lambda`` is read off the
    backward composition ``f_1^-1 o ... o f_n^-1`` on the same streams.
    """
    if grid < 64:
        raise ValueError("grid must be >= 64")
    if n < 1 or n_samples < 1:
        raise ValueError("n and n_samples must be >= 1")
    keys = np.repeat(stream_keys(seed, n_samples), grid)
    z = np.tile(np.arange(grid) / grid, n_samples)
    _, ld = compose_lanes(nu, keys, 0, z, n, "forward", threads)
    _, lb = compose_lanes(nu, keys, 0, z, n, "backward", threads)
    lam_s = ld.reshape(n_samples, grid).min(axis=1) / n
    Lam_s = -lb.reshape(n_samples, grid).min(axis=1) / n
    lam, lam_se, lam_sd = mean_and_stderr(lam_s)
    Lam, Lam_se, Lam_sd = mean_and_stderr(Lam_s)
    return ExponentPair(lam, Lam, lam_se, Lam_se, lam_sd, Lam_sd, n, n_samples, "kingman")


def exponents_integral(nu: NuMeasure, eta: EmpiricalMeasure, eta_minus: EmpiricalMeasure,
                       mc_draws: int | None = None, seed: int = 0) -> ExponentPair:
    """``lambda = int log|f'| d(eta x nu)`` and ``Lambda = -int log|(f^{-1})'| d(eta^- x nu)``.

    For the second identity the inverse system is integrated against its own
    stationary measure ``eta^-``. With ``mc_draws=None`` the average over
    ``nu`` is exact and the average over each empirical measure runs over all
    its samples; otherwise ``mc_draws`` pairs ``(x, f)`` are drawn.
    """
    probs = np.asarray(nu.probs)

    def integrate(samples, inverse):
        if mc_draws is None:
            per = np.zeros(samples.size)
            for p, f in zip(probs, nu.atoms):
                g = f.inverse() if inverse else f
                per += p * np.asarray(g.log_derivative(samples), dtype=float)
            return per
        rng = np.random.default_rng([seed, int(inverse)])
        xi = samples[rng.integers(0, samples.size, mc_draws)]
        fi = rng.choice(len(nu.atoms), size=mc_draws, p=probs)
        out = np.empty(mc_draws)
        for k, f in enumerate(nu.atoms):
            sel = fi == k
            g = f.inverse() if inverse else f
            out[sel] = np.asarray(g.log_derivative(xi[sel]), dtype=float)
        return out

    lam_v = integrate(eta.samples, False)
    Lam_v = -integrate(eta_minus.samples, True)
    lam, lam_se, lam_sd = mean_and_stderr(lam_v)
    Lam, Lam_se, Lam_sd = mean_and_stderr(Lam_v)
    return ExponentPair(lam, Lam, lam_se, Lam_se, lam_sd, Lam_sd, 0, len(lam_v), "integral")


def sync_rate(nu: NuMeasure, x, y, n: int, n_samples: int, seed: int = 0,
              threads: int | None = None) -> EstimateReport:
    """Average of ``(1/n) log [d(f^n_omega x, f^n_omega y) / d(x, y)]`` over streams.

    Dividing by the initial gap makes isometries score exactly 0 at every ``n``.
    """
    x, y = float(x), float(y)
    if x == y:
        raise ValueError("sync_rate needs x != y")
    keys = stream_keys(seed, n_samples)
    _, logsep, _ = track_pairs(nu, keys, 0, np.full(n_samples, x), y, n, COLLAPSE_TOL,
                               threads=threads)
    v, se, sd = mean_and_stderr((logsep - math.log(dist(x, y))) / n)
    return EstimateReport(v, se, n, n_samples, 0, seed, {"sd": sd})


def arc_dichotomy(nu: NuMeasure, x, y, n: int, n_samples: int, seed: int = 0,
                  collapse_tol: float = COLLAPSE_TOL, threads: int | None = None) -> float:
    """Fraction of streams for which one of the arcs ``[x, y]``, ``[y, x]``
    shrinks below ``collapse_tol`` within ``n`` steps."""
    x, y = float(x), float(y)
    if x == y:
        raise ValueError("arc_dichotomy needs x != y")
    keys = stream_keys(seed, n_samples)
    collapse, _, _ = track_pairs(nu, keys, 0, np.full(n_samples, x), y, n, collapse_tol,
                                 min(1e-9, collapse_tol), threads)
    return float(np.count_nonzero(collapse >= 0)) / n_samples
