import math

import numpy as np
import pytest

from circlerds.circle import Arc
from circlerds.engine import NuMeasure
from circlerds.errors import DegenerateBall, HypothesisViolation
from circlerds.estimators import (DimensionRunConfig, EmpiricalMeasure, auto_radius,
                                  dimension_identity_residual, furstenberg_entropy,
                                  local_dimension, preimage_arc, radius_schedule,
                                  sample_stationary, telescoping_residual)
from circlerds.maps import Projective, Rotation


def cantor(n, seed, depth=40):
    rng = np.random.default_rng(seed)
    digits = 2 * rng.integers(0, 2, (n, depth))
    return 0.5 * (digits * 3.0 ** -np.arange(1, depth + 1)).sum(axis=1)


def test_empirical_measure_counts():
    eta = EmpiricalMeasure(np.array([0.95, 0.05, 0.1, 0.5]))
    assert eta.arc_mass(Arc(0.9, 0.1)) == pytest.approx(0.75)
    assert eta.ball_mass(0.0, 0.05) == pytest.approx(0.5)
    assert eta.arc_mass(Arc(0.5, 0.5)) == pytest.approx(0.25)
    assert eta.arc_mass(Arc(0.6, 0.6)) == 0.0


def test_ball_counts_brute_force():
    rng = np.random.default_rng(3)
    s = rng.random(500)
    eta = EmpiricalMeasure(s)
    for x, r in zip(rng.random(30), rng.uniform(0, 0.49, 30)):
        d = np.abs(s - x)
        brute = np.count_nonzero(np.minimum(d, 1 - d) <= r)
        assert int(eta.ball_counts(x, r)) == brute


def test_knn_radius_holds_k_points():
    eta = EmpiricalMeasure(np.random.default_rng(0).random(2000))
    r = eta.knn_radius(np.array([0.3]), 50)[0]
    # the 50th neighbour sits on the boundary, where rounding decides membership
    assert int(eta.ball_counts(0.3, r * (1 + 1e-9))) >= 50
    assert int(eta.ball_counts(0.3, r * (1 - 1e-9))) <= 49


def test_entropy_zero_for_rotation_on_grid():
    n = 1000
    eta = EmpiricalMeasure(np.arange(n) / n)
    nu = NuMeasure.dirac(Rotation(7 / n))
    h = furstenberg_entropy(nu, eta, radius=0.0105, mc_draws=2000, leave_one_out=False,
                            drift=False)
    assert h.value == 0.0


def test_entropy_of_invariant_measure_is_small():
    # Lebesgue is invariant for rotations: h_F = 0 up to sampling noise
    eta = EmpiricalMeasure(np.random.default_rng(1).random(100_000))
    nu = NuMeasure.uniform(Rotation(0.1), Rotation(0.37))
    h = furstenberg_entropy(nu, eta, mc_draws=20_000)
    assert abs(h.value) < 4 * h.stderr + 0.01


def test_entropy_sl2_is_positive(sl2):
    eta = sample_stationary(sl2, 100, 100_000, seed=2)
    h = furstenberg_entropy(sl2, eta, mc_draws=20_000, seed=2)
    assert h.value > 0
    assert "drift_half_radius" in h.diagnostics
    assert auto_radius(eta, seed=2) == pytest.approx(h.diagnostics["radius"])


def test_entropy_degenerate_ball_is_reported():
    eta = EmpiricalMeasure(np.random.default_rng(0).random(50))
    nu = NuMeasure.uniform(Rotation(0.1), Rotation(0.37))
    with pytest.raises(DegenerateBall):
        furstenberg_entropy(nu, eta, radius=1e-6, mc_draws=200)


def test_radius_schedule():
    r = radius_schedule(1e-4, 1e-1, 4)
    np.testing.assert_allclose(r, [1e-4, 1e-3, 1e-2, 1e-1])
    with pytest.raises(ValueError):
        radius_schedule(0.1, 0.01, 5)


def test_local_dimension_uniform():
    eta = EmpiricalMeasure(np.random.default_rng(0).random(100_000))
    assert local_dimension(eta).value == pytest.approx(1.0, abs=0.05)


def test_local_dimension_dirac():
    eta = EmpiricalMeasure(np.full(10_000, 0.3))
    d = local_dimension(eta)
    assert d.value == pytest.approx(0.0, abs=0.01)


def test_local_dimension_cantor():
    eta = EmpiricalMeasure(cantor(100_000, 1))
    assert local_dimension(eta).value == pytest.approx(math.log(2) / math.log(3), abs=0.03)


def test_local_dimension_empty_balls_refused():
    eta = EmpiricalMeasure(np.random.default_rng(0).random(100))
    with pytest.raises(DegenerateBall):
        local_dimension(eta, r_min=1e-6, r_max=1e-3)


def test_preimage_arc_orientation():
    refl = Projective.from_matrix(np.diag([1.0, -1.0]))
    a = preimage_arc(refl, Arc(0.2, 0.4))
    assert (a.start.value, a.end.value) == pytest.approx((0.6, 0.8))
    p = preimage_arc(Rotation(0.1), Arc(0.3, 0.3))
    assert p.length == 0.0


def test_telescoping_identity_map_is_exact():
    eta = EmpiricalMeasure(np.random.default_rng(0).random(100))
    assert telescoping_residual(eta, [Rotation(0.0)], Arc(0.1, 0.6)) == 0.0


@pytest.mark.parametrize("kind", ["rotation", "projective"])
def test_telescoping_random_maps(kind):
    rng = np.random.default_rng(5)
    eta = EmpiricalMeasure(rng.random(10_000))
    if kind == "rotation":
        maps = [Rotation(a) for a in rng.random(5)]
    else:
        maps = [Projective.from_matrix(np.diag([1.3, 1 / 1.3]) + 0.3 * rng.normal(size=(2, 2)))
                for _ in range(5)]
    assert telescoping_residual(eta, maps, Arc(0.2, 0.45)) <= 1e-12


def test_dimension_identity_refused_for_single_map(single):
    with pytest.raises(HypothesisViolation):
        dimension_identity_residual(single, DimensionRunConfig(n_samples=1000))


def test_dimension_identity_sl2(sl2):
    runs = DimensionRunConfig(n_steps=100, n_samples=100_000, seed=1, r_min=1e-5)
    res = dimension_identity_residual(sl2, runs)
    assert res.residual <= 0.1
    assert 0 < res.dimension.value <= 1.05
    lam = res.lyapunov
    assert 0 < res.entropy.value <= -lam.value + 3 * math.hypot(res.entropy.stderr, lam.stderr)
    d = res.to_dict()
    assert d["residual"] == res.residual
