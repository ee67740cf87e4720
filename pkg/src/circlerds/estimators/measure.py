"""Result containers shared by the estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..circle import Arc, CirclePoint, set_diameter, wrap_array


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Equal-weight empirical measure on R/Z backed by raw sorted samples.

    Ball and arc masses are exact for the sample: a closed ball
    ``B(x, r) = {s : dist(s, x) <= r}`` is counted by binary search.
    """

    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.sort(wrap_array(np.asarray(self.samples, dtype=float).ravel()))
        if s.size == 0:
            raise ValueError("an empirical measure needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def __len__(self) -> int:
        return self.count

    def arc_counts(self, start, length) -> np.ndarray:
        """Number of samples in the closed arcs ``[start, start + length]``."""
        s = self.samples
        n = s.size
        start = wrap_array(np.asarray(start, dtype=float))
        length = np.asarray(length, dtype=float)
        end = start + length
        # index of first sample >= start and of first sample > end (on the lift)
        lo = np.searchsorted(s, start, side="left")
        inside = end < 1.0
        hi_in = np.searchsorted(s, np.where(inside, end, 0.0), side="right")
        hi_wrap = np.searchsorted(s, np.where(inside, 0.0, end - 1.0), side="right")
        counts = np.where(inside, hi_in - lo, (n - lo) + np.minimum(hi_wrap, lo))
        return np.where(length >= 1.0, n, counts).astype(np.int64)

    def ball_counts(self, x, r) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("ball radius must be non-negative")
        return self.arc_counts(x - r, 2.0 * r)

    def ball_mass(self, x, r):
        m = self.ball_counts(x, r) / self.count
        return float(m) if np.ndim(m) == 0 else m

    def arc_mass(self, arc: Arc) -> float:
        return float(self.arc_counts(arc.start.value, arc.length)) / self.count

    def knn_radius(self, x, k: int) -> np.ndarray:
        """Distance from each ``x`` to its ``k``-th nearest sample."""
        s = self.samples
        n = s.size
        k = min(max(int(k), 1), n)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if 2 * k + 1 >= n:
            idx = np.broadcast_to(np.arange(n), (x.size, n))
        else:
            pos = np.searchsorted(s, wrap_array(x))
            win = np.arange(-k, k + 1)
            idx = (pos[:, None] + win[None, :]) % n
        d = wrap_array(s[idx] - x[:, None])
        d = np.minimum(d, 1.0 - d)
        return np.partition(d, k - 1, axis=1)[:, k - 1]

    def multiplicities(self):
        """Distinct sample values and how often each occurs."""
        return np.unique(self.samples, return_counts=True)

    def diameter(self) -> float:
        return set_diameter(self.samples)


@dataclass(frozen=True)
class EstimateReport:
    value: float
    stderr: float
    n_steps: int
    n_samples: int
    burn_in: int = 0
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.stderr >= 0 or math.isnan(self.stderr)):
            raise ValueError("stderr must be non-negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "stderr": float(self.stderr),
            "n_steps": int(self.n_steps),
            "n_samples": int(self.n_samples),
            "burn_in": int(self.burn_in),
            "seed": self.seed,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class ArgmaxSet:
    """Grid-refined maximisers of a log-derivative.

    ``degenerate`` is set when the points spread over more than ten grid
    cells, in which case the set does not single out one point.
    """

    points: tuple[CirclePoint, ...]
    attained_value: float
    spacing: float
    degenerate: bool

    @property
    def point(self) -> CirclePoint:
        return self.points[0]

    @property
    def diameter(self) -> float:
        return set_diameter([p.value for p in self.points])


class PointEstimate(NamedTuple):
    point: CirclePoint
    spread: float
    probes: int


@dataclass(frozen=True)
class ExponentPair:
    """Estimates of the extremal exponents ``(lambda, Lambda)``.

    Unpacks as the pair ``lam, Lam``. ``*_sd`` are across-sample standard
    deviations, ``*_stderr`` the standard errors of the means.
    """

    lam: float
    Lam: float
    lam_stderr: float
    Lam_stderr: float
    lam_sd: float = float("nan")
    Lam_sd: float = float("nan")
    n_steps: int = 0
    n_samples: int = 1
    method: str = ""

    def __iter__(self):
        return iter((self.lam, self.Lam))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam, "Lambda": self.Lam,
            "lambda_stderr": self.lam_stderr, "Lambda_stderr": self.Lam_stderr,
            "lambda_sd": self.lam_sd, "Lambda_sd": self.Lam_sd,
            "n_steps": self.n_steps, "n_samples": self.n_samples, "method": self.method,
        }


def mean_and_stderr(values) -> tuple[float, float, float]:
    """Mean, standard error and sample standard deviation."""
    v = np.asarray(values, dtype=float).ravel()
    m = float(v.mean())
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return m, sd / math.sqrt(v.size), sd
