"""Property-based checks with hypothesis."""
import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from circlerds.circle import Arc, arc_contains, dist, wrap
from circlerds.errors import DegenerateBall
from circlerds.estimators import EmpiricalMeasure, telescoping_residual
from circlerds.maps import Projective, Rotation, SineDiffeo

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


@given(unit, unit, unit)
def test_dist_is_a_metric(x, y, z):
    assert 0.0 <= dist(x, y) <= 0.5
    assert dist(x, y) == dist(y, x)
    assert dist(x, z) <= dist(x, y) + dist(y, z) + 1e-15


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_range(r):
    v = wrap(r)
    assert 0.0 <= v < 1.0
    assert wrap(v) == v


@given(unit, unit, unit)
def test_point_in_arc_or_complement(a, b, x):
    # a degenerate arc is a point and so is its complement
    assume(wrap(a) != wrap(b))
    arc = Arc(a, b)
    assert arc_contains(arc, x) or arc_contains(arc.complement(), x)


def random_map(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        return Rotation(float(rng.random()))
    if kind == 1:
        return SineDiffeo(float(rng.random()), float(rng.uniform(-0.9, 0.9)))
    m = rng.normal(size=(2, 2))
    while abs(np.linalg.det(m)) < 0.1:
        m = rng.normal(size=(2, 2))
    return Projective.from_matrix(m)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_telescoping_identity_is_exact(seed):
    rng = np.random.default_rng(seed)
    # mixtures of smooth and clustered mass, so arcs see very different weights
    n = int(rng.integers(2000, 20000))
    s = np.concatenate([rng.random(n), rng.normal(rng.random(), 0.02, n // 2) % 1.0])
    eta = EmpiricalMeasure(s)
    maps = [random_map(rng) for _ in range(int(rng.integers(1, 8)))]
    start = float(rng.random())
    arc = Arc(start, start + float(rng.uniform(0.05, 0.6)))
    try:
        r = telescoping_residual(eta, maps, arc)
    except DegenerateBall:
        # an intermediate preimage arc holds no samples; the identity is undefined
        return
    assert r <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seeds, unit)
def test_ball_mass_is_monotone_in_radius(seed, x):
    rng = np.random.default_rng(seed)
    eta = EmpiricalMeasure(rng.random(500) ** 3)
    radii = np.sort(rng.uniform(0, 0.49, 20))
    m = eta.ball_mass(np.full(20, x), radii)
    assert np.all(np.diff(m) >= 0)
    assert 0.0 <= m[0] and m[-1] <= 1.0


@settings(max_examples=60, deadline=None)
@given(seeds, unit)
def test_inverse_round_trip(seed, x):
    f = random_map(np.random.default_rng(seed))
    assert dist(f.eval_inverse(f(x)), x) < 1e-9
    assert dist(f.inverse()(f(x)), x) < 1e-9
