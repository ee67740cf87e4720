import math

import numpy as np
import pytest

from circlerds.engine import NuMeasure, inverse_measure
from circlerds.estimators import (EmpiricalMeasure, arc_dichotomy, exponents_integral,
                                  extremal_exponents_kingman, pointwise_exponent,
                                  pointwise_exponents, sample_stationary, sync_rate)
from circlerds.maps import Rotation

from conftest import LOG4


def test_pointwise_rotation_is_zero(rotation):
    assert pointwise_exponent(rotation, rotation.stream(0), 0.3, 100) == 0.0


def test_pointwise_single_map_dichotomy(single):
    om = single.stream(0)
    assert pointwise_exponent(single, om, 0.25, 1000) == pytest.approx(-LOG4, abs=0.05)
    assert pointwise_exponent(single, om, 0.5, 1000) == pytest.approx(LOG4, abs=1e-12)


def test_pointwise_vector_matches_scalar(sl2):
    om = sl2.stream(2)
    xs = np.linspace(0, 1, 7, endpoint=False)
    v = pointwise_exponents(sl2, om, xs, 300)
    for x, e in zip(xs, v):
        assert pointwise_exponent(sl2, om, x, 300) == pytest.approx(e, abs=1e-12)


def test_kingman_examples(rotation, single):
    lam, Lam = extremal_exponents_kingman(rotation, 100, 5)
    assert (lam, Lam) == (0.0, 0.0)
    lam, Lam = extremal_exponents_kingman(single, 1000, 4)
    assert lam == pytest.approx(-LOG4, abs=0.05)
    assert Lam == pytest.approx(LOG4, abs=0.05)


def test_kingman_near_symmetric_for_sl2(sl2):
    # unimodular cocycle: lambda = -2 lambda_1, Lambda = 2 lambda_1
    p = extremal_exponents_kingman(sl2, 2000, 20)
    assert p.lam < 0 < p.Lam
    assert abs(p.lam + p.Lam) < 0.05 * p.Lam


def test_integral_examples(single):
    eta = EmpiricalMeasure(np.zeros(10))
    eta_m = EmpiricalMeasure(np.full(10, 0.5))
    p = exponents_integral(single, eta, eta_m)
    assert p.lam == pytest.approx(-LOG4, abs=1e-14)
    assert p.Lam == pytest.approx(LOG4, abs=1e-14)
    rot = NuMeasure.dirac(Rotation(0.2))
    r = exponents_integral(rot, EmpiricalMeasure(np.random.default_rng(0).random(50)), eta_m)
    assert (r.lam, r.Lam) == (0.0, 0.0)


def test_integral_agrees_with_kingman(sl2):
    eta = sample_stationary(sl2, 100, 50_000, seed=1)
    eta_m = sample_stationary(inverse_measure(sl2), 100, 50_000, seed=2)
    it = exponents_integral(sl2, eta, eta_m)
    kg = extremal_exponents_kingman(sl2, 4000, 30, seed=3)
    assert abs(it.lam - kg.lam) < 0.03 * abs(kg.lam)
    assert abs(it.Lam - kg.Lam) < 0.03 * kg.Lam
    mc = exponents_integral(sl2, eta, eta_m, mc_draws=20_000, seed=1)
    assert abs(mc.lam - it.lam) < 5 * mc.lam_stderr


def test_sync_rate_examples(rotation, single, sl2):
    assert sync_rate(rotation, 0.1, 0.6, 300, 10).value == pytest.approx(0.0, abs=1e-12)
    assert sync_rate(single, 0.3, 0.4, 2000, 4).value == pytest.approx(-LOG4, abs=0.05)
    r = sync_rate(sl2, 0.1, 0.6, 1000, 200, seed=1)
    kg = extremal_exponents_kingman(sl2, 2000, 30, seed=2)
    assert r.value < 0
    assert abs(r.value - kg.lam) < 3 * math.hypot(r.stderr, kg.lam_stderr) + 0.02


def test_sync_rate_is_not_floored_by_rounding(single):
    # separations drop far below 1e-16 long before n = 3000
    v = sync_rate(single, 0.3, 0.4, 3000, 2).value
    assert v == pytest.approx(-LOG4, abs=0.01)


def test_arc_dichotomy_examples(rotation, single, sl2):
    assert arc_dichotomy(rotation, 0.1, 0.6, 500, 50) == 0.0
    assert arc_dichotomy(single, 0.3, 0.7, 200, 10) == 1.0
    assert arc_dichotomy(sl2, 0.0, 0.5, 500, 500, seed=1) >= 0.99


def test_same_points_rejected(sl2):
    with pytest.raises(ValueError):
        sync_rate(sl2, 0.2, 0.2, 10, 2)
    with pytest.raises(ValueError):
        arc_dichotomy(sl2, 0.2, 0.2, 10, 2)
