"""Parametric families of circle diffeomorphisms.

Three concrete families are supported, plus a wrapper for inverses that have
no closed form:

* :class:`Projective` -- the action of an invertible 2x2 matrix on the
  projective line, identified with R/Z through ``phi = pi * x``.
* :class:`SineDiffeo` -- ``x + a + (b / 2pi) sin(2 pi x)`` with ``|b| < 1``.
* :class:`Rotation` -- ``x + a``.
* :class:`InverseMap` -- ``f^{-1}`` evaluated by root finding.

Every map evaluates elementwise on floats or numpy arrays. The formula
functions at the top of the module are shared with the numpy kernels so the
two code paths cannot drift apart.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .circle import wrap, wrap_array

TWO_PI = 2.0 * math.pi

# kernel kind codes; the compiled kernels use the same numbering
PROJECTIVE = 0
SINE = 1
ROTATION = 2
SINE_INVERSE = 3

N_PARAMS = 9

# bisection steps before the Newton finish when inverting SineDiffeo
_BISECTION_STEPS = 8
_NEWTON_TOL = 1e-14
_NEWTON_MAX = 50


# -- formulas -----------------------------------------------------------------

def sincospi(x):
    """``(cos(pi x), sin(pi x))`` up to a common sign, exact at multiples of 1/2.

    The sign is irrelevant for the projective action. Reducing to
    ``r = x - k/2`` first keeps the fixed points 0 and 1/2 of diagonal maps
    exactly fixed; ``cos(pi * 0.5)`` would otherwise leave a 6e-17 offset that
    a repelling point amplifies.
    """
    x = np.asarray(x, dtype=float)
    k = np.rint(2.0 * x)
    r = math.pi * (x - 0.5 * k)
    cr, sr = np.cos(r), np.sin(r)
    odd = np.mod(k, 2.0) == 1.0
    return np.where(odd, -sr, cr), np.where(odd, cr, sr)


def projective_apply(m11, m12, m21, m22, logdet, x):
    """Return ``(f_A(x), log|f_A'(x)|)`` with ``f_A' = det A / |A v|^2``."""
    c, s = sincospi(x)
    u = m11 * c + m12 * s
    w = m21 * c + m22 * s
    y = wrap_array(np.arctan2(w, u) / math.pi)
    return y, logdet - np.log(u * u + w * w)


def sine_apply(a, b, x):
    x = np.asarray(x, dtype=float)
    t = TWO_PI * x
    y = wrap_array(x + a + (b / TWO_PI) * np.sin(t))
    return y, np.log1p(b * np.cos(t))


def sine_invert(a, b, y):
    """Solve ``x + a + (b/2pi) sin(2 pi x) = y`` for the lift ``x``.

    The lift is increasing with ``|F(x) - x - a| <= |b|/2pi``, so the root is
    bracketed around ``y - a``; a few bisection steps are followed by Newton.
    """
    y = np.asarray(y, dtype=float)
    a = np.broadcast_to(np.asarray(a, dtype=float), y.shape)
    b = np.broadcast_to(np.asarray(b, dtype=float), y.shape)
    c = b / TWO_PI
    half = np.abs(c)
    lo = y - a - half
    hi = y - a + half
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        g = mid + a + c * np.sin(TWO_PI * mid) - y
        up = g > 0.0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    x = 0.5 * (lo + hi)
    active = np.ones(y.shape, dtype=bool)
    for _ in range(_NEWTON_MAX):
        g = x + a + c * np.sin(TWO_PI * x) - y
        step = g / (1.0 + b * np.cos(TWO_PI * x))
        x = np.where(active, x - step, x)
        active &= np.abs(step) >= _NEWTON_TOL
        if not active.any():
            break
    else:
        raise RuntimeError("SineDiffeo inversion did not converge")
    return x


def sine_inverse_apply(a, b, y):
    x = sine_invert(a, b, y)
    return wrap_array(x), -np.log1p(b * np.cos(TWO_PI * x))


def rotation_apply(a, x):
    x = np.asarray(x, dtype=float)
    return wrap_array(x + a), np.zeros_like(x)


def _scalar(v, like):
    return float(v) if np.ndim(like) == 0 else v


# -- descriptors -----------------------------------------------------------------

class CircleMap(ABC):
    """A C^{1+tau} diffeomorphism of R/Z with an exact log-derivative."""

    @abstractmethod
    def _apply(self, x):
        """Vectorised ``(f(x), log|f'(x)|)``."""

    @abstractmethod
    def _apply_inverse(self, y):
        """Vectorised ``(f^{-1}(y), log|(f^{-1})'(y)|)``."""

    @property
    @abstractmethod
    def orientation(self) -> int:
        """+1 for orientation-preserving maps, -1 otherwise."""

    @abstractmethod
    def inverse(self) -> "CircleMap":
        """Descriptor of the inverse map."""

    @abstractmethod
    def kernel_row(self) -> tuple[int, tuple[float, ...]]:
        """``(kind code, parameters)`` as consumed by the orbit kernels."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Plain-data form used in configs and reports."""

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        return _scalar(self._apply(x)[0], x)

    def eval_inverse(self, y):
        return _scalar(self._apply_inverse(y)[0], y)

    def log_derivative(self, x):
        return _scalar(self._apply(x)[1], x)

    def eval_with_log_derivative(self, x):
        y, ld = self._apply(x)
        return _scalar(y, x), _scalar(ld, x)


@dataclass(frozen=True)
class Projective(CircleMap):
    """Projective action of ``[[m11, m12], [m21, m22]]`` on P^1 = R/Z."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(v) for v in self.entries) or self.det == 0.0:
            raise ValueError(f"Projective needs a finite invertible matrix, got {self.matrix.tolist()}")

    @classmethod
    def from_matrix(cls, m) -> "Projective":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.m11, self.m12, self.m21, self.m22)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def orientation(self) -> int:
        return 1 if self.det > 0 else -1

    def _inverse_entries(self):
        d = self.det
        return (self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    def _apply(self, x):
        return projective_apply(*self.entries, math.log(abs(self.det)), x)

    def _apply_inverse(self, y):
        return projective_apply(*self._inverse_entries(), -math.log(abs(self.det)), y)

    def inverse(self) -> "Projective":
        return Projective(*self._inverse_entries())

    def kernel_row(self):
        return PROJECTIVE, (*self.entries, *self._inverse_entries(), math.log(abs(self.det)))

    def to_dict(self) -> dict:
        return {"kind": "projective", "matrix": [[self.m11, self.m12], [self.m21, self.m22]]}


@dataclass(frozen=True)
class SineDiffeo(CircleMap):
    """``x -> x + a + (b / 2pi) sin(2 pi x)``; a diffeomorphism iff ``|b| < 1``."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", wrap(float(self.a)))
        object.__setattr__(self, "b", float(self.b))
        if not abs(self.b) < 1.0:
            raise ValueError(f"SineDiffeo requires |b| < 1, got b={self.b}")

    @property
    def orientation(self) -> int:
        return 1

    def _apply(self, x):
        return sine_apply(self.a, self.b, x)

    def _apply_inverse(self, y):
        return sine_inverse_apply(self.a, self.b, y)

    def inverse(self) -> "InverseMap":
        return InverseMap(self)

    def kernel_row(self):
        return SINE, (self.a, self.b) + (0.0,) * (N_PARAMS - 2)

    def to_dict(self) -> dict:
        return {"kind": "sine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Rotation(CircleMap):
    a: float

    def __post_init__(self):
        object.__setattr__(self, "a", wrap(float(self.a)))

    @property
    def orientation(self) -> int:
        return 1

    def _apply(self, x):
        return rotation_apply(self.a, x)

    def _apply_inverse(self, y):
        return rotation_apply(-self.a, y)

    def inverse(self) -> "Rotation":
        return Rotation(1.0 - self.a if self.a else 0.0)

    def kernel_row(self):
        return ROTATION, (self.a,) + (0.0,) * (N_PARAMS - 1)

    def to_dict(self) -> dict:
        return {"kind": "rotation", "a": self.a}


@dataclass(frozen=True)
class InverseMap(CircleMap):
    """The inverse of ``base``, evaluated through ``base.eval_inverse``."""

    base: CircleMap

    def __post_init__(self):
        if isinstance(self.base, InverseMap):
            raise ValueError("nested InverseMap; use base.inverse() to flatten")

    @property
    def orientation(self) -> int:
        return self.base.orientation

    def _apply(self, x):
        return self.base._apply_inverse(x)

    def _apply_inverse(self, y):
        return self.base._apply(y)

    def inverse(self) -> CircleMap:
        return self.base

    def kernel_row(self):
        if isinstance(self.base, SineDiffeo):
            return SINE_INVERSE, (self.base.a, self.base.b) + (0.0,) * (N_PARAMS - 2)
        return self.base.inverse().kernel_row()

    def to_dict(self) -> dict:
        return {"kind": "inverse", "base": self.base.to_dict()}


# -- functional surface ---------------------------------------------

def eval_map(f: CircleMap, x):
    return f.eval(x)


def eval_inverse(f: CircleMap, y):
    return f.eval_inverse(y)


def log_derivative(f: CircleMap, x):
    return f.log_derivative(x)


def orientation(f: CircleMap) -> int:
    return f.orientation


def invert_descriptor(f: CircleMap) -> CircleMap:
    return f.inverse()


def holder_modulus(f: CircleMap, eps: float, grid: int) -> float:
    """Grid lower bound for ``sup_{d(x,y) <= eps} |log f'(x) - log f'(y)|``.

    Evaluated on ``grid`` equally spaced points; pairs are compared at every
    index offset up to ``eps * grid``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    ld = np.asarray(f.log_derivative(np.arange(grid) / grid), dtype=float)
    max_shift = min(int(math.floor(eps * grid + 1e-9)), grid // 2)
    best = 0.0
    for s in range(1, max_shift + 1):
        best = max(best, float(np.max(np.abs(ld - np.roll(ld, s)))))
    return best


def from_dict(spec: dict) -> CircleMap:
    """Build a descriptor from its plain-data form (see :meth:`CircleMap.to_dict`)."""
    kind = spec.get("kind")
    if kind == "projective":
        return Projective.from_matrix(spec["matrix"])
    if kind == "sine":
        return SineDiffeo(spec["a"], spec["b"])
    if kind == "rotation":
        return Rotation(spec["a"])
    if kind == "inverse":
        return from_dict(spec["base"]).inverse()
    raise ValueError(f"unknown map kind {kind!r}")


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])
