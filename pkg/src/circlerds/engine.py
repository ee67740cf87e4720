"""Driving measures, seed-deterministic sequences and composition orders.

For ``omega = (f_1, f_2, ...)`` the engine evaluates

* the forward composition ``f_n o ... o f_1`` (:func:`forward_apply`),
* the reversed composition ``f_1 o ... o f_n`` (:func:`reversed_apply`),
* the backward composition ``f_1^{-1} o ... o f_n^{-1}`` (:func:`backward_apply`),

with the log-derivative accumulated by the chain rule along the way.

A sequence is never stored. The atom index of ``f_n`` is a pure function
of ``(key, offset + n)``: a SplitMix64 hash of a counter, turned into a
uniform in [0, 1) and mapped through the inverse CDF of the atom
probabilities in their fixed order. The shift ``sigma`` just increments
``offset``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels, parallel
from .circle import CirclePoint, as_point
from .maps import CircleMap, from_dict

GENERATOR_ID = "splitmix64-counter-v1"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int = 0) -> int:
    """64-bit key of sub-stream ``stream`` of a run seeded with ``seed``."""
    return _mix64(_mix64(seed) + (stream + 1) * _GAMMA)


def stream_keys(seed: int, count: int, start: int = 0) -> np.ndarray:
    return np.array([stream_key(seed, s) for s in range(start, start + count)], dtype=np.uint64)


@dataclass(frozen=True)
class OmegaStream:
    """A lazily materialised i.i.d. sequence of atom indices.

    ``index(n)`` for ``n >= 1`` is the atom index of ``f_n``; it depends only
    on the seed, the sub-stream number and the shift offset.
    """

    seed: int
    cdf: tuple[float, ...]
    stream: int = 0
    offset: int = 0
    generator_id: str = field(default=GENERATOR_ID, init=False)

    @property
    def key(self) -> int:
        return stream_key(self.seed, self.stream)

    def index(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence positions start at 1")
        return int(self._draw(np.array([n]))[0])

    def indices(self, n: int) -> np.ndarray:
        """Atom indices of ``f_1, ..., f_n``."""
        return self._draw(np.arange(1, n + 1))

    def _draw(self, positions: np.ndarray) -> np.ndarray:
        from ._pykernels import draw

        keys = np.full(positions.shape, self.key, dtype=np.uint64)
        return draw(keys, positions + self.offset, np.asarray(self.cdf))

    def shifted(self, k: int = 1) -> "OmegaStream":
        """The stream of ``sigma^k omega`` (drop the first ``k`` maps)."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        return OmegaStream(self.seed, self.cdf, self.stream, self.offset + k)


@dataclass(frozen=True)
class NuMeasure:
    """Finitely supported probability measure on circle diffeomorphisms."""

    atoms: tuple[CircleMap, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        probs = tuple(float(p) for p in self.probs)
        if not atoms:
            raise ValueError("a measure needs at least one atom")
        if len(atoms) != len(probs):
            raise ValueError(f"{len(atoms)} atoms but {len(probs)} probabilities")
        if any(not (0.0 < p <= 1.0) for p in probs):
            raise ValueError(f"probabilities must lie in (0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(probs)!r}, not 1")
        for f in atoms:
            if not isinstance(f, CircleMap):
                raise TypeError(f"atoms must be CircleMap descriptors, got {type(f).__name__}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def dirac(cls, f: CircleMap) -> "NuMeasure":
        return cls((f,), (1.0,))

    @classmethod
    def uniform(cls, *maps: CircleMap) -> "NuMeasure":
        return cls(tuple(maps), tuple(1.0 / len(maps) for _ in maps))

    @classmethod
    def from_dict(cls, spec: dict) -> "NuMeasure":
        return cls(tuple(from_dict(a) for a in spec["atoms"]), tuple(spec["probs"]))

    def to_dict(self) -> dict:
        return {"atoms": [f.to_dict() for f in self.atoms], "probs": list(self.probs)}

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def cdf(self) -> tuple[float, ...]:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return tuple(float(v) for v in c)

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Kernel arrays ``(kinds, params, orientations, cdf)``."""
        rows = [f.kernel_row() for f in self.atoms]
        kinds = np.array([r[0] for r in rows], dtype=np.int_)
        params = np.array([r[1] for r in rows], dtype=np.float64)
        orient = np.array([f.orientation for f in self.atoms], dtype=np.int_)
        return kinds, params, orient, np.array(self.cdf)

    def stream(self, seed: int, stream: int = 0) -> OmegaStream:
        return OmegaStream(seed, self.cdf, stream)

    def inverse(self) -> "NuMeasure":
        return inverse_measure(self)

    def min_prob(self) -> float:
        return min(self.probs)


def inverse_measure(nu: NuMeasure) -> NuMeasure:
    """The law of ``f^{-1}`` for ``f ~ nu``: same weights, inverted atoms."""
    return NuMeasure(tuple(f.inverse() for f in nu.atoms), nu.probs)


class OrbitTrace(NamedTuple):
    points: np.ndarray
    log_deriv_sums: np.ndarray
    n: int


class Endpoint(NamedTuple):
    point: CirclePoint
    log_derivative: float


# order name -> (read indices n..1, apply inverses)
ORDERS = {
    "forward": (False, False),            # f_n o ... o f_1
    "reversed": (True, False),            # f_1 o ... o f_n
    "backward": (True, True),             # f_1^-1 o ... o f_n^-1 = (f_n o ... o f_1)^-1
    "reversed_inverse": (False, True),    # f_n^-1 o ... o f_1^-1 = (f_1 o ... o f_n)^-1
}


def compose_lanes(nu: NuMeasure, keys, offsets, x0, n: int, order: str = "forward",
                  threads: int | None = None):
    """Evaluate one composition order on many lanes at once.

    ``keys`` and ``offsets`` broadcast against ``x0``. Returns the endpoint
    array and the accumulated ``log|derivative|`` array.
    """
    if n < 0:
        raise ValueError("composition length must be >= 0")
    try:
        reverse, invert = ORDERS[order]
    except KeyError:
        raise ValueError(f"unknown composition order {order!r}") from None
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    keys = np.broadcast_to(np.asarray(keys, dtype=np.uint64), x0.shape).ravel()
    offsets = np.broadcast_to(np.asarray(offsets, dtype=np.int64), x0.shape).ravel()
    flat = x0.ravel()
    kinds, params, _, cdf = nu.table

    def run(lo, hi):
        return kernels.compose(kinds, params, cdf, keys[lo:hi], offsets[lo:hi], flat[lo:hi],
                               n, reverse, invert)

    x, ld = parallel.chunked(run, flat.size, 2, threads)
    return x.reshape(x0.shape), ld.reshape(x0.shape)


def track_pairs(nu: NuMeasure, keys, offsets, x0, y0, n: int, collapse_tol: float = 1e-6,
                linear_tol: float = 1e-9, threads: int | None = None):
    """Follow the arcs between ``x0`` and ``y0`` under forward compositions.

    Returns ``(collapse_step, log_separation, min_separation)`` per lane.
    """
    if linear_tol > collapse_tol:
        raise ValueError("linear_tol must not exceed collapse_tol")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64)).ravel()
    y0 = np.broadcast_to(np.asarray(y0, dtype=np.float64), x0.shape).ravel()
    keys = np.broadcast_to(np.asarray(keys, dtype=np.uint64), x0.shape).ravel()
    offsets = np.broadcast_to(np.asarray(offsets, dtype=np.int64), x0.shape).ravel()
    kinds, params, orient, cdf = nu.table

    def run(lo, hi):
        return kernels.track_pair(kinds, params, orient, cdf, keys[lo:hi], offsets[lo:hi],
                                  x0[lo:hi], y0[lo:hi], n, collapse_tol, linear_tol)

    return parallel.chunked(run, x0.size, 3, threads)


def forward_apply(nu: NuMeasure, omega: OmegaStream, x, n: int) -> OrbitTrace:
    """Orbit ``x, f_1 x, f_2 f_1 x, ...`` with running ``log|(f^k)'(x)|``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    kinds, params, _, cdf = nu.table
    _, _, pts, sums = kernels.compose(
        kinds, params, cdf, np.array([omega.key], dtype=np.uint64),
        np.array([omega.offset], dtype=np.int64), np.array([float(x)]), n, False, False, True)
    return OrbitTrace(pts[:, 0].copy(), sums[:, 0].copy(), n)


def _single(nu, omega, x, n, order) -> Endpoint:
    y, ld = compose_lanes(nu, omega.key, omega.offset, [float(x)], n, order, threads=1)
    return Endpoint(CirclePoint(float(y[0])), float(ld[0]))


def reversed_apply(nu: NuMeasure, omega: OmegaStream, x, n: int) -> Endpoint:
    """``f_1 o ... o f_n (x)`` and its log-derivative."""
    return _single(nu, omega, x, n, "reversed")


def backward_apply(nu: NuMeasure, omega: OmegaStream, x, n: int) -> CirclePoint:
    """``f_1^{-1} o ... o f_n^{-1} (x)``."""
    return _single(nu, omega, x, n, "backward").point


def backward_apply_with_derivative(nu: NuMeasure, omega: OmegaStream, x, n: int) -> Endpoint:
    return _single(nu, omega, x, n, "backward")


def forward_endpoint(nu: NuMeasure, omega: OmegaStream, x, n: int) -> Endpoint:
    return _single(nu, omega, x, n, "forward")


def apply_word(maps_seq, x):
    """Apply ``maps_seq[0]`` first, then ``maps_seq[1]``, ...; returns (point, logd)."""
    y = float(as_point(x))
    logd = 0.0
    for f in maps_seq:
        y, ld = f.eval_with_log_derivative(y)
        logd += ld
    return CirclePoint(y), logd
