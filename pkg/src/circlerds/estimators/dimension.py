"""Local dimension regression and the dimension identity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..engine import NuMeasure
from ..errors import DegenerateBall, HypothesisViolation
from .entropy import furstenberg_entropy
from .exponents import exponents_integral
from .measure import EmpiricalMeasure, EstimateReport, mean_and_stderr
from .points import sample_stationary

MAX_DEGENERATE_FRACTION = 0.01


def radius_schedule(r_min: float, r_max: float, n_radii: int) -> np.ndarray:
    if not 0.0 < r_min < r_max < 0.5:
        raise ValueError("need 0 < r_min < r_max < 1/2")
    if n_radii < 3:
        raise ValueError("n_radii must be >= 3")
    return np.geomspace(r_min, r_max, n_radii)


def local_dimension(eta: EmpiricalMeasure, probes: int = 500, r_min: float = 1e-4,
                    r_max: float = 1e-1, n_radii: int = 12, seed: int = 0,
                    leave_one_out: bool = True) -> EstimateReport:
    """Probe-averaged slope of ``log eta(B(x, r))`` against ``log r``.

    Probe points are drawn from ``eta``. With ``leave_one_out`` the probe's
    own sample is removed from its balls. Balls that end up empty are left
    out of that probe's fit; more than 1% of them raises
    :class:`DegenerateBall`. The spread of per-probe slopes is the
    exact-dimensionality diagnostic.
    """
    radii = radius_schedule(r_min, r_max, n_radii)
    rng = np.random.default_rng(seed)
    n = eta.count
    pick = rng.choice(n, size=min(probes, n), replace=False)
    x = eta.samples[pick]
    counts = eta.ball_counts(x[:, None], radii[None, :]).astype(float)
    if leave_one_out and n > 1:
        mass = (counts - 1.0) / (n - 1)
    else:
        mass = counts / n
    ok = mass > 0
    bad = 1.0 - ok.mean()
    if bad > MAX_DEGENERATE_FRACTION:
        raise DegenerateBall(
            f"{bad:.1%} of (probe, radius) balls are empty at r_min={r_min:.3g} "
            f"with {n} samples; raise r_min")
    lr = np.log(radii)[None, :] * np.ones_like(mass)
    lm = np.log(np.where(ok, mass, 1.0))
    w = ok.astype(float)
    nw = w.sum(axis=1)
    usable = nw >= 2
    xm = (w * lr).sum(axis=1) / np.maximum(nw, 1)
    ym = (w * lm).sum(axis=1) / np.maximum(nw, 1)
    sxx = (w * (lr - xm[:, None]) ** 2).sum(axis=1)
    sxy = (w * (lr - xm[:, None]) * (lm - ym[:, None])).sum(axis=1)
    slopes = sxy[usable] / sxx[usable]
    v, se, sd = mean_and_stderr(slopes)
    mean_log_mass = [float(np.mean(lm[ok[:, j], j])) if ok[:, j].any() else float("nan")
                     for j in range(radii.size)]
    diag = {
        "spread": sd,
        "radii": radii.tolist(),
        "mean_log_mass": mean_log_mass,
        "degenerate_fraction": float(bad),
        "probes": int(slopes.size),
    }
    return EstimateReport(v, se, 0, int(slopes.size), 0, seed, diag)


@dataclass(frozen=True)
class DimensionRunConfig:
    """Sizes for one end-to-end dimension identity run."""

    n_steps: int = 200
    n_samples: int = 100_000
    seed: int = 0
    entropy_radius: float | None = None
    entropy_draws: int = 20000
    target_count: int = 100
    probes: int = 500
    r_min: float = 1e-4
    r_max: float = 1e-1
    n_radii: int = 12


@dataclass(frozen=True)
class DimensionResult:
    dimension: EstimateReport
    entropy: EstimateReport
    lyapunov: EstimateReport
    formula: float
    formula_stderr: float
    residual: float
    residual_stderr: float
    hypotheses: object = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension.to_dict(),
            "entropy": self.entropy.to_dict(),
            "lyapunov": self.lyapunov.to_dict(),
            "formula": self.formula,
            "formula_stderr": self.formula_stderr,
            "residual": self.residual,
            "residual_stderr": self.residual_stderr,
            "hypotheses": None if self.hypotheses is None else self.hypotheses.to_dict(),
            **self.extra,
        }


def dimension_identity_residual(nu: NuMeasure, runs: DimensionRunConfig | None = None,
                                hypotheses=None, require_hypotheses: bool = True,
                                eta: EmpiricalMeasure | None = None) -> DimensionResult:
    """``|dim(eta) - (-h_F / lambda)|`` from one stationary sample.

    ``lambda = int log|f'| d(eta x nu)`` is integrated over the same sample.
    Refuses with :class:`HypothesisViolation` when the standing hypotheses
    fail, unless ``require_hypotheses`` is False.
    """
    runs = runs or DimensionRunConfig()
    if require_hypotheses:
        if hypotheses is None:
            from ..diagnostics import check_hypotheses

            hypotheses = check_hypotheses(nu, seed=runs.seed)
        if not hypotheses.passed:
            raise HypothesisViolation(
                "dimension identity refused: " + "; ".join(hypotheses.reasons), hypotheses)
    if eta is None:
        eta = sample_stationary(nu, runs.n_steps, runs.n_samples, runs.seed)
    dim = local_dimension(eta, runs.probes, runs.r_min, runs.r_max, runs.n_radii, runs.seed)
    h = furstenberg_entropy(nu, eta, runs.entropy_radius, runs.entropy_draws, runs.seed,
                            target_count=runs.target_count)
    ex = exponents_integral(nu, eta, eta)
    lam = EstimateReport(ex.lam, ex.lam_stderr, 0, ex.n_samples, 0, runs.seed,
                         {"sd": ex.lam_sd})
    formula = -h.value / lam.value
    # delta method for -h / lambda
    f_se = abs(formula) * math.sqrt((h.stderr / h.value) ** 2 + (lam.stderr / lam.value) ** 2) \
        if h.value != 0 else abs(h.stderr / lam.value)
    residual = abs(dim.value - formula)
    r_se = math.sqrt(dim.stderr ** 2 + f_se ** 2)
    extra = {"stationary": dict(eta.meta)}
    return DimensionResult(dim, h, lam, formula, f_se, residual, r_se, hypotheses, extra)

