"""The compiled and numpy kernels agree to rounding level."""
import numpy as np
import pytest

from circlerds import kernels
from circlerds.engine import ORDERS, stream_keys

from conftest import diag_map, sine_pair, sl2_pair

BACKENDS = kernels.available()
needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_backend_is_reported():
    assert kernels.BACKEND in BACKENDS


@needs_both
@pytest.mark.parametrize("make", [sl2_pair, sine_pair, diag_map])
@pytest.mark.parametrize("order", list(ORDERS))
def test_compose_backends_agree(make, order):
    nu = make()
    kinds, params, _, cdf = nu.table
    keys = stream_keys(1, 300)
    offs = np.zeros(300, dtype=np.int64)
    x0 = np.linspace(0, 1, 300, endpoint=False)
    rev, inv = ORDERS[order]
    out = {name: mod.compose(kinds, params, cdf, keys, offs, x0, 200, rev, inv)
           for name, mod in BACKENDS.items()}
    dx = np.abs(out["cython"][0] - out["numpy"][0])
    dx = np.minimum(dx, 1 - dx)
    assert dx.max() < 1e-9
    np.testing.assert_allclose(out["cython"][1], out["numpy"][1], rtol=1e-9, atol=1e-8)


@needs_both
@pytest.mark.parametrize("make", [sl2_pair, sine_pair])
def test_track_pair_backends_agree(make):
    nu = make()
    kinds, params, orient, cdf = nu.table
    keys = stream_keys(2, 200)
    offs = np.zeros(200, dtype=np.int64)
    x = np.full(200, 0.1)
    y = np.full(200, 0.6)
    a = BACKENDS["cython"].track_pair(kinds, params, orient, cdf, keys, offs, x, y, 300, 1e-6, 1e-9)
    b = BACKENDS["numpy"].track_pair(kinds, params, orient, cdf, keys, offs, x, y, 300, 1e-6, 1e-9)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_allclose(a[1], b[1], rtol=1e-8, atol=1e-8)


@needs_both
def test_compose_trace_backends_agree():
    nu = sl2_pair()
    kinds, params, _, cdf = nu.table
    keys = stream_keys(4, 3)
    offs = np.zeros(3, dtype=np.int64)
    a = BACKENDS["cython"].compose(kinds, params, cdf, keys, offs, np.zeros(3), 20, False, False, True)
    b = BACKENDS["numpy"].compose(kinds, params, cdf, keys, offs, np.zeros(3), 20, False, False, True)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, atol=1e-12)


def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--lanes", "64", "--steps", "20", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "compose" in out and "track_pair" in out
