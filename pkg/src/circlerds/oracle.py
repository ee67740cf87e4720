"""Linear ground truth for projective families.

A projective family is driven by the same random matrices as a 2x2 linear
cocycle. Its top Lyapunov exponent and singular directions are computed
here from the matrices alone, using the same index streams as the circle
engine but none of its kernels.

For a unimodular atom, ``f_A'(x) = 1 / |A v|^2``, so the extremal circle
exponents are ``Lambda = 2 lambda_1`` and ``lambda = -2 lambda_1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._pykernels import draw
from .circle import CirclePoint, wrap
from .engine import NuMeasure, OmegaStream, stream_keys
from .errors import DegenerateGap
from .estimators.exponents import extremal_exponents_kingman
from .estimators.measure import EstimateReport, mean_and_stderr
from .maps import Projective


@dataclass(frozen=True, eq=False)
class MatrixAtomSet:
    matrices: np.ndarray
    probs: tuple[float, ...]

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float).reshape(-1, 2, 2)
        det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
        if np.any(det == 0) or not np.all(np.isfinite(m)):
            raise ValueError("matrices must be finite and invertible")
        probs = tuple(float(p) for p in self.probs)
        if len(probs) != m.shape[0]:
            raise ValueError("one probability per matrix")
        if abs(sum(probs) - 1.0) > 1e-12 or min(probs) <= 0:
            raise ValueError("probabilities must be positive and sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_nu(cls, nu: NuMeasure) -> "MatrixAtomSet":
        if not all(isinstance(f, Projective) for f in nu.atoms):
            raise TypeError("the linear oracle needs a family of Projective atoms")
        return cls(np.array([f.matrix for f in nu.atoms]), nu.probs)

    def to_nu(self) -> NuMeasure:
        return NuMeasure(tuple(Projective.from_matrix(m) for m in self.matrices), self.probs)

    @property
    def dets(self) -> np.ndarray:
        m = self.matrices
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]

    @property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    def is_unimodular(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.abs(self.dets) - 1.0) <= tol))


def normalize_unimodular(ms: MatrixAtomSet) -> MatrixAtomSet:
    """Scale every matrix to ``|det| = 1``; the projective action is unchanged."""
    scale = np.sqrt(np.abs(ms.dets))
    return MatrixAtomSet(ms.matrices / scale[:, None, None], ms.probs)


def top_lyapunov(ms: MatrixAtomSet, n: int, n_samples: int, seed: int = 0) -> EstimateReport:
    """``lambda_1`` from ``(1/n) log sigma_1(A_n ... A_1)`` with per-step renormalisation.

    Sample ``i`` reads its matrices from stream ``stream_key(seed, i)``.
    Using the operator norm rather than the growth of one vector removes the
    ``O(1/n)`` start-vector term, so a single diagonal matrix gives its top
    log-eigenvalue exactly.
    """
    if n < 1 or n_samples < 1:
        raise ValueError("n and n_samples must be >= 1")
    keys = stream_keys(seed, n_samples)
    p = np.broadcast_to(np.eye(2), (n_samples, 2, 2)).copy()
    acc = np.zeros(n_samples)
    m = ms.matrices
    cdf = ms.cdf
    for j in range(1, n + 1):
        a = m[draw(keys, np.full(n_samples, j, dtype=np.int64), cdf)]
        p = a @ p
        s = np.sqrt((p * p).sum(axis=(1, 2)))
        p /= s[:, None, None]
        acc += np.log(s)
    acc += np.log([_top_singular(q) for q in p])
    val, se, sd = mean_and_stderr(acc / n)
    return EstimateReport(val, se, n, n_samples, 0, seed, {"sd": sd})


def _left_angle(p) -> float:
    a, b, c, d = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    return 0.5 * math.atan2(2.0 * (a * c + b * d), a * a + b * b - c * c - d * d)


def _right_angle(p) -> float:
    a, b, c, d = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    return 0.5 * math.atan2(2.0 * (a * b + c * d), a * a + c * c - b * b - d * d)


def _top_singular(p) -> float:
    # largest singular value of a 2x2 matrix in closed form
    a, b, c, d = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    return math.sqrt(0.5 * (s + math.sqrt(max(s * s - 4.0 * det * det, 0.0))))


def _product(mats, reverse: bool):
    """Renormalised product with its log scale and ``log sigma_1 - log sigma_2``."""
    p = np.eye(2)
    log_scale = 0.0
    log_det = 0.0
    for a in mats:
        p = p @ a if reverse else a @ p
        s = math.sqrt(float((p * p).sum()))
        p = p / s
        log_scale += math.log(s)
        log_det += math.log(abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))
    log_s1 = log_scale + math.log(_top_singular(p))
    log_s2 = log_det - log_s1
    return p, log_s1 - log_s2


class OseledetsDirections(NamedTuple):
    unstable: CirclePoint
    stable: CirclePoint
    log_gap_reversed: float
    log_gap_forward: float


def oseledets_directions(ms: MatrixAtomSet, omega: OmegaStream, n: int,
                         min_gap_rate: float = 0.1) -> OseledetsDirections:
    """Singular directions of the products driven by ``omega``.

    ``unstable``: top left singular direction of ``A_1 ... A_n``, the image
    direction of the reversed product (matches ``pi``).
    ``stable``: bottom right singular direction of ``A_n ... A_1``, the most
    contracted input of the forward product (matches ``theta``).
    Directions are returned as ``x = phi / pi``. Raises :class:`DegenerateGap`
    when ``sigma_1 / sigma_2 < exp(min_gap_rate * n)`` for either product.
    """
    if tuple(omega.cdf) != tuple(float(c) for c in ms.cdf):
        raise ValueError("stream cdf does not match the matrix probabilities")
    mats = ms.matrices[omega.indices(n)]
    pr, gap_r = _product(mats, reverse=True)
    pf, gap_f = _product(mats, reverse=False)
    need = min_gap_rate * n
    if gap_r < need or gap_f < need:
        raise DegenerateGap(
            f"singular value gap exp({min(gap_r, gap_f):.3g}) below exp({need:.3g}) at n={n}")
    unstable = wrap(_left_angle(pr) / math.pi)
    stable = wrap(_right_angle(pf) / math.pi + 0.5)
    return OseledetsDirections(CirclePoint(unstable), CirclePoint(stable), gap_r, gap_f)


@dataclass(frozen=True)
class ConsistencyReport:
    lambda1: EstimateReport
    Lambda_hat: float
    lambda_hat: float
    Lambda_residual: float
    lambda_residual: float
    Lambda_rel: float | None
    lambda_rel: float | None
    Lambda_stderr: float
    lambda_stderr: float

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1.to_dict(),
            "Lambda_hat": self.Lambda_hat, "lambda_hat": self.lambda_hat,
            "Lambda_residual": self.Lambda_residual, "lambda_residual": self.lambda_residual,
            "Lambda_rel": self.Lambda_rel, "lambda_rel": self.lambda_rel,
            "Lambda_stderr": self.Lambda_stderr, "lambda_stderr": self.lambda_stderr,
        }


def projective_consistency(ms: MatrixAtomSet, nu: NuMeasure, n: int, n_samples: int,
                           seed: int = 0, grid: int = 64) -> ConsistencyReport:
    """``(2 lambda_1 - Lambda_hat, -2 lambda_1 - lambda_hat)`` with combined stderr.

    Relative residuals divide by ``2 lambda_1`` and are None when it vanishes.
    """
    if not ms.is_unimodular():
        raise ValueError("projective_consistency needs |det| = 1 atoms; "
                         "apply normalize_unimodular first")
    lam1 = top_lyapunov(ms, n, n_samples, seed)
    ex = extremal_exponents_kingman(nu, n, n_samples, grid, seed)
    two = 2.0 * lam1.value
    res_L = two - ex.Lam
    res_l = -two - ex.lam
    rel = abs(two) > 1e-12
    return ConsistencyReport(
        lam1, ex.Lam, ex.lam, res_L, res_l,
        abs(res_L) / two if rel else None, abs(res_l) / two if rel else None,
        math.hypot(2 * lam1.stderr, ex.Lam_stderr), math.hypot(2 * lam1.stderr, ex.lam_stderr))
