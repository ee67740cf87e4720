import math

import numpy as np
import pytest

from circlerds.circle import (Arc, CirclePoint, arc_contains, arc_contains_array, ball_arc,
                              circular_mean, dist, dist_array, map_arc, max_pairwise_dist,
                              set_diameter, wrap, wrap_array)
from circlerds.maps import Projective, Rotation


@pytest.mark.parametrize("x, y, d", [(0.1, 0.9, 0.2), (0.3, 0.3, 0.0), (0.0, 0.5, 0.5)])
def test_dist_examples(x, y, d):
    assert dist(x, y) == pytest.approx(d, abs=1e-15)
    assert dist(y, x) == pytest.approx(d, abs=1e-15)


def test_wrap_near_integer_stays_in_unit_interval():
    assert wrap(-1e-18) == 0.0
    assert wrap(1.25) == pytest.approx(0.25)
    v = wrap_array([-1e-18, 2.5, -0.25])
    assert np.all((v >= 0) & (v < 1))
    np.testing.assert_allclose(v, [0.0, 0.5, 0.75])


def test_circle_point_arithmetic():
    p = CirclePoint(0.9) + 0.2
    assert p.value == pytest.approx(0.1)
    assert (CirclePoint(0.1) - 0.2).value == pytest.approx(0.9)


@pytest.mark.parametrize("arc, x, inside", [((0.2, 0.4), 0.3, True), ((0.9, 0.1), 0.0, True),
                                            ((0.2, 0.4), 0.5, False)])
def test_arc_contains_examples(arc, x, inside):
    a = Arc(*arc)
    assert arc_contains(a, x) is inside
    assert bool(arc_contains_array(a.start.value, a.end.value, x)) is inside


def test_degenerate_arc_is_a_point():
    a = Arc(0.3, 0.3)
    assert a.length == 0.0
    assert 0.3 in a and 0.31 not in a


def test_arc_complement_lengths_sum_to_one():
    a = Arc(0.9, 0.2)
    assert a.length + a.complement().length == pytest.approx(1.0)


def _image(a, f):
    return map_arc(a, f(a.start.value), f(a.end.value), f.orientation)


def test_map_arc_examples():
    rot = Rotation(0.5)
    b = _image(Arc(0.2, 0.4), rot)
    assert (b.start.value, b.end.value) == pytest.approx((0.7, 0.9))
    b = _image(Arc(0.9, 0.1), rot)
    assert (b.start.value, b.end.value) == pytest.approx((0.4, 0.6))
    # x -> -x is the projective action of diag(1, -1)
    refl = Projective.from_matrix(np.diag([1.0, -1.0]))
    assert refl.orientation == -1
    b = _image(Arc(0.2, 0.4), refl)
    assert (b.start.value, b.end.value) == pytest.approx((0.6, 0.8))


def test_map_arc_rejects_bad_orientation():
    with pytest.raises(ValueError):
        map_arc(Arc(0, 0.1), 0, 0.1, 0)


def test_ball_arc():
    b = ball_arc(0.05, 0.1)
    assert b.start.value == pytest.approx(0.95)
    assert b.length == pytest.approx(0.2)
    with pytest.raises(ValueError):
        ball_arc(0.0, 0.5)


def test_set_diameter_and_pairwise():
    pts = [0.95, 0.05, 0.1]
    assert set_diameter(pts) == pytest.approx(0.15)
    assert max_pairwise_dist(pts) == pytest.approx(0.15)
    rng = np.random.default_rng(1)
    x = rng.random(60)
    brute = dist_array(x[:, None], x[None, :]).max()
    assert max_pairwise_dist(x) == pytest.approx(brute, abs=1e-15)


def test_circular_mean_across_zero():
    assert dist(circular_mean([0.98, 0.02]), 0.0) < 1e-12
    assert circular_mean([0.25]) == pytest.approx(0.25)
    assert math.isfinite(circular_mean([0.1, 0.3]))
