import math

import numpy as np
import pytest

from circlerds.circle import dist
from circlerds.maps import (InverseMap, Projective, Rotation, SineDiffeo, eval_inverse, eval_map,
                            from_dict, holder_modulus, invert_descriptor, log_derivative,
                            orientation, rotation_matrix)

DIAG = Projective.from_matrix(np.diag([2.0, 0.5]))


def brute_projective(m, x):
    """Independent reference: act on the unit vector at angle pi*x."""
    v = np.array([math.cos(math.pi * x), math.sin(math.pi * x)])
    w = np.asarray(m) @ v
    return (math.atan2(w[1], w[0]) / math.pi) % 1.0


def test_eval_examples():
    assert eval_map(Projective.from_matrix(np.eye(2)), 0.37) == pytest.approx(0.37, abs=1e-15)
    assert eval_map(Rotation(0.25), 0.9) == pytest.approx(0.15)
    assert eval_map(DIAG, 0.25) == pytest.approx(math.atan(0.25) / math.pi, abs=1e-15)


def test_projective_matches_vector_action():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = rng.normal(size=(2, 2))
        f = Projective.from_matrix(m)
        for x in rng.random(5):
            assert dist(f(x), brute_projective(m, x)) < 1e-13


def test_eval_inverse_examples():
    assert eval_inverse(Rotation(0.25), 0.15) == pytest.approx(0.9)
    assert eval_inverse(DIAG, 0.0) == 0.0
    g = SineDiffeo(0.0, 0.5)
    assert eval_inverse(g, g(0.3)) == pytest.approx(0.3, abs=1e-13)


def test_log_derivative_examples():
    assert log_derivative(Rotation(0.3), 0.77) == 0.0
    assert log_derivative(SineDiffeo(0.1, 0.5), 0.0) == pytest.approx(math.log(1.5))
    assert log_derivative(DIAG, 0.0) == pytest.approx(-2 * math.log(2), abs=1e-15)


@pytest.mark.parametrize("f", [DIAG, SineDiffeo(0.17, 0.5), SineDiffeo(0.61, -0.3),
                               Projective.from_matrix([[1.0, 2.0], [-0.5, 0.7]]),
                               Projective.from_matrix(np.diag([1.0, -3.0]))])
def test_log_derivative_matches_central_differences(f):
    h = 1e-6
    for x in np.linspace(0.03, 0.97, 9):
        fd = ((f(x + h) - f(x - h) + 0.5) % 1.0 - 0.5) / (2 * h)
        assert abs(math.log(abs(fd)) - f.log_derivative(x)) < 1e-6


def test_orientation_examples():
    assert orientation(Projective.from_matrix(np.diag([1.0, -1.0]))) == -1
    assert orientation(SineDiffeo(0.3, 0.9)) == 1
    assert orientation(DIAG) == 1


def test_sine_rejects_non_diffeomorphism():
    with pytest.raises(ValueError):
        SineDiffeo(0.0, 1.0)


def test_holder_modulus_examples():
    assert holder_modulus(Rotation(0.1), 0.1, 1000) == 0.0
    g = SineDiffeo(0.0, 0.5)
    vals = [holder_modulus(g, e, 10_000) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_holder_modulus_against_brute_force():
    grid = 2000
    eps = 0.25
    ld = DIAG.log_derivative(np.arange(grid) / grid)
    i = np.arange(grid)
    d = np.abs(i[:, None] - i[None, :])
    d = np.minimum(d, grid - d)
    brute = np.abs(ld[:, None] - ld[None, :])[d <= eps * grid].max()
    assert holder_modulus(DIAG, eps, grid) == pytest.approx(brute, abs=1e-3)
    assert holder_modulus(DIAG, eps, grid) > 0


def test_invert_descriptor_examples():
    r = invert_descriptor(Rotation(0.25))
    assert isinstance(r, Rotation) and r.a == pytest.approx(0.75)
    p = invert_descriptor(DIAG)
    assert isinstance(p, Projective)
    m = p.matrix / p.matrix[0, 0] * 0.5
    np.testing.assert_allclose(m, np.diag([0.5, 2.0]), atol=1e-15)
    s = invert_descriptor(SineDiffeo(0.1, 0.5))
    assert isinstance(s, InverseMap)
    for y in np.linspace(0, 1, 50, endpoint=False):
        assert dist(s.base(s(y)), y) <= 1e-12
    assert s.inverse() == SineDiffeo(0.1, 0.5)


def test_inverse_log_derivative_is_reciprocal():
    f = SineDiffeo(0.61, 0.5)
    g = f.inverse()
    for y in np.linspace(0, 1, 17):
        assert g.log_derivative(y) == pytest.approx(-f.log_derivative(g(y)), abs=1e-12)


def test_dict_round_trip():
    for f in (DIAG, Rotation(0.3), SineDiffeo(0.1, 0.2), SineDiffeo(0.1, 0.2).inverse()):
        g = from_dict(f.to_dict())
        for x in (0.1, 0.6):
            assert dist(f(x), g(x)) < 1e-15
    with pytest.raises(ValueError):
        from_dict({"kind": "mobius"})


def test_rotation_matrix_conjugation_rotates_fixed_points():
    theta = 0.4
    r = rotation_matrix(theta)
    f = Projective.from_matrix(r @ np.diag([2.0, 0.5]) @ r.T)
    assert dist(f(theta / math.pi), theta / math.pi) < 1e-14
