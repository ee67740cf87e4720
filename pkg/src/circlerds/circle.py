"""Points and oriented arcs on the circle R/Z.

All angles are unit-interval representatives: a real ``r`` is identified with
``r - floor(r)`` in ``[0, 1)``. The scalar helpers accept plain floats or
:class:`CirclePoint`; the ``*_array`` variants work elementwise on numpy
arrays and are what the estimators use internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def wrap(r: float) -> float:
    """Canonical representative of ``r`` in ``[0, 1)``."""
    v = r - math.floor(r)
    # r slightly below an integer rounds up to exactly 1.0
    return 0.0 if v >= 1.0 else v


def wrap_array(r) -> np.ndarray:
    v = np.asarray(r, dtype=float)
    v = v - np.floor(v)
    return np.where(v >= 1.0, 0.0, v)


@dataclass(frozen=True, order=True)
class CirclePoint:
    """A point of R/Z stored by its representative in ``[0, 1)``."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", wrap(float(self.value)))

    def __float__(self) -> float:
        return self.value

    def __add__(self, other) -> "CirclePoint":
        return CirclePoint(self.value + float(other))

    def __sub__(self, other) -> "CirclePoint":
        return CirclePoint(self.value - float(other))

    def __repr__(self) -> str:
        return f"CirclePoint({self.value!r})"


def as_point(x) -> CirclePoint:
    return x if isinstance(x, CirclePoint) else CirclePoint(float(x))


def dist(x, y) -> float:
    """Arc-length metric: the shorter of the two arcs between ``x`` and ``y``."""
    # difference of representatives keeps dist(x, y) == dist(y, x) bit for bit
    d = abs(wrap(float(x)) - wrap(float(y)))
    return min(d, 1.0 - d)


def dist_array(x, y) -> np.ndarray:
    d = np.abs(wrap_array(x) - wrap_array(y))
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class Arc:
    """Closed arc from ``start`` to ``end`` in the positive direction.

    An arc with ``start == end`` is the single point, of length 0.
    """

    start: CirclePoint
    end: CirclePoint

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "end", as_point(self.end))

    @property
    def length(self) -> float:
        return float(arc_length(self.start.value, self.end.value))

    @property
    def diameter(self) -> float:
        return min(self.length, 0.5)

    def complement(self) -> "Arc":
        return Arc(self.end, self.start)

    def __contains__(self, x) -> bool:
        return arc_contains(self, x)


def arc_length(start, end):
    """Length of the positive arc from ``start`` to ``end`` (representatives in [0, 1)).

    Only ``start == end`` gives 0; a nearly full arc may round up to exactly 1
    but is never folded to 0.
    """
    d = np.asarray(end, dtype=float) - np.asarray(start, dtype=float)
    return np.where(d >= 0.0, d, d + 1.0)


def arc_contains(a: Arc, x) -> bool:
    return wrap(float(x) - a.start.value) <= a.length


def arc_contains_array(start, end, x) -> np.ndarray:
    start = wrap_array(start)
    return wrap_array(np.asarray(x, dtype=float) - start) <= arc_length(start, wrap_array(end))


def map_arc(a: Arc, image_start, image_end, orientation: int) -> Arc:
    """Image of ``a`` under a homeomorphism with the given endpoint images.

    An orientation-reversing map sends the positively oriented arc
    ``[start, end]`` onto ``[f(end), f(start)]``.
    """
    if orientation not in (1, -1):
        raise ValueError(f"orientation must be +1 or -1, got {orientation!r}")
    if orientation == 1:
        return Arc(image_start, image_end)
    return Arc(image_end, image_start)


def ball_arc(x, r: float) -> Arc:
    """The closed ball ``B(x, r)`` as an arc (``r < 1/2``)."""
    if not 0.0 <= r < 0.5:
        raise ValueError(f"ball radius must lie in [0, 1/2), got {r!r}")
    x = float(x)
    return Arc(x - r, x + r)


def circular_mean(x) -> float:
    """Mean direction of points on R/Z via the mean resultant vector of 2*pi*x."""
    ang = 2.0 * np.pi * np.asarray(x, dtype=float)
    return wrap(math.atan2(float(np.sin(ang).mean()), float(np.cos(ang).mean())) / (2.0 * np.pi))


def max_pairwise_dist(x) -> float:
    """Largest circle distance between any two of the points."""
    pts = np.sort(wrap_array(x).ravel())
    if pts.size < 2:
        return 0.0
    # for sorted points the farthest pair is found by a two-pointer sweep
    n = pts.size
    best = 0.0
    j = 0
    for i in range(n):
        if j < i:
            j = i
        while j + 1 < n and pts[j + 1] - pts[i] <= 0.5:
            j += 1
        best = max(best, pts[j] - pts[i])
        if j + 1 < n:
            best = max(best, 1.0 - (pts[j + 1] - pts[i]))
    return float(best)


def set_diameter(x) -> float:
    """Length of the smallest closed arc containing all the points."""
    pts = np.sort(wrap_array(x).ravel())
    if pts.size < 2:
        return 0.0
    gaps = np.diff(np.concatenate([pts, [pts[0] + 1.0]]))
    return float(1.0 - gaps.max())
