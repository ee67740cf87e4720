"""Empirical checks of the standing hypotheses.

The results of the theory need the action to have no common fixed point and
to be proximal, and they imply synchronization. These checks turn those
assumptions into measured evidence so estimators can refuse out-of-scope
inputs rather than return numbers with no meaning.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._search import golden_section_min
from .circle import CirclePoint, dist_array, wrap
from .engine import NuMeasure
from .estimators.exponents import sync_rate
from .estimators.measure import EmpiricalMeasure

PROXIMALITY_THRESHOLD = 1e-3


def _fixed_point_defect(nu: NuMeasure, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.max([dist_array(f.eval(x), x) for f in nu.atoms], axis=0)


def common_fixed_points(nu: NuMeasure, grid: int = 1024, tol: float = 1e-8,
                        refine_tol: float = 1e-13) -> list[CirclePoint]:
    """Every point found where all atoms move ``x`` by less than ``tol``.

    The defect ``max_f d(f x, x)`` is scanned on a grid; each local minimum
    is refined by golden section inside its two neighbouring cells.
    """
    if grid < 256:
        raise ValueError("grid must be >= 256")
    z = np.arange(grid) / grid
    g = _fixed_point_defect(nu, z)
    h = 1.0 / grid
    minima = np.flatnonzero((g <= np.roll(g, 1)) & (g <= np.roll(g, -1)))
    found: list[float] = []
    for i in minima:
        if g[i] == 0.0:
            x, v = float(z[i]), 0.0
        else:
            x, v = golden_section_min(lambda t: float(_fixed_point_defect(nu, wrap(t))),
                                      z[i] - h, z[i] + h, tol=refine_tol)
            x = wrap(x)
        if v < tol and all(dist_array(x, y) > 2 * h for y in found):
            found.append(x)
    return [CirclePoint(x) for x in sorted(found)]


def common_fixed_point_scan(nu: NuMeasure, grid: int = 1024, tol: float = 1e-8,
                            refine_tol: float = 1e-13) -> CirclePoint | None:
    """A common fixed point of all atoms, or None when the scan finds none."""
    pts = common_fixed_points(nu, grid, tol, refine_tol)
    if not pts:
        return None
    defects = [float(_fixed_point_defect(nu, p.value)) for p in pts]
    return pts[int(np.argmin(defects))]


def proximality_probe(nu: NuMeasure, pairs: int = 32, depth: int = 60, beam: int = 8,
                      seed: int = 0) -> float:
    """Worst over random pairs of the smallest gap reached by any explored word.

    For each pair a beam search over words keeps the ``beam`` images with the
    smallest gap at each length. The empty word is included, so the result
    never exceeds the initial gap.
    """
    if depth < 1 or beam < 1:
        raise ValueError("depth and beam must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.random(pairs)
    y = rng.random(pairs)
    best = dist_array(x, y)
    sx = x[:, None]
    sy = y[:, None]
    for _ in range(depth):
        nx = np.concatenate([np.asarray(f.eval(sx), dtype=float) for f in nu.atoms], axis=1)
        ny = np.concatenate([np.asarray(f.eval(sy), dtype=float) for f in nu.atoms], axis=1)
        gap = dist_array(nx, ny)
        keep = np.argsort(gap, axis=1, kind="stable")[:, :beam]
        sx = np.take_along_axis(nx, keep, axis=1)
        sy = np.take_along_axis(ny, keep, axis=1)
        best = np.minimum(best, np.take_along_axis(gap, keep[:, :1], axis=1)[:, 0])
    return float(best.max())


def atom_scan(eta: EmpiricalMeasure, threshold: float) -> list[CirclePoint]:
    """Sample values repeated more than ``threshold * count`` times."""
    vals, counts = eta.multiplicities()
    return [CirclePoint(float(v)) for v in vals[counts > threshold * eta.count]]


@dataclass(frozen=True)
class HypothesisReport:
    common_fixed_point: CirclePoint | None
    proximality_min_gap: float
    sync_rate: float
    verdict: str
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.common_fixed_point is not None and self.verdict != "fail":
            raise ValueError("a common fixed point forces verdict 'fail'")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        cfp = self.common_fixed_point
        return {
            "common_fixed_point": None if cfp is None else cfp.value,
            "proximality_min_gap": self.proximality_min_gap,
            "sync_rate": self.sync_rate,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
        }


def check_hypotheses(nu: NuMeasure, seed: int = 0, grid: int = 1024, tol: float = 1e-8,
                     pairs: int = 32, depth: int = 60, beam: int = 8,
                     prox_threshold: float = PROXIMALITY_THRESHOLD, sync_n: int = 500,
                     sync_samples: int = 64) -> HypothesisReport:
    """Run all three checks; the verdict passes only if every one does."""
    cfp = common_fixed_point_scan(nu, grid, tol)
    gap = proximality_probe(nu, pairs, depth, beam, seed)
    sr = sync_rate(nu, 0.1, 0.6, sync_n, sync_samples, seed).value
    reasons = []
    if cfp is not None:
        reasons.append(f"common fixed point near {cfp.value:.12g}")
    if not gap <= prox_threshold:
        reasons.append(f"proximality probe gap {gap:.3g} > {prox_threshold:g}")
    if not sr < 0:
        reasons.append(f"sync rate {sr:.3g} is not negative")
    return HypothesisReport(cfp, gap, sr, "fail" if reasons else "pass", tuple(reasons))

