"""Time the compiled and numpy orbit kernels on the same workloads.

    python3 benchmarks/bench_kernels.py [--lanes 2048] [--steps 1000] [--repeat 3]

Prints one row per (family, kernel, backend) with the best wall time, the
throughput in map evaluations per second and the speedup of the compiled
kernel over numpy.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from circlerds import kernels
from circlerds.engine import NuMeasure, stream_keys
from circlerds.maps import Projective, SineDiffeo, rotation_matrix


def families() -> dict:
    a = np.diag([2.0, 0.5])
    r = rotation_matrix(math.pi / 4)
    return {
        "sl2_pair": NuMeasure.uniform(Projective.from_matrix(a), Projective.from_matrix(r @ a @ r.T)),
        "sine_pair": NuMeasure.uniform(SineDiffeo(0.17, 0.5), SineDiffeo(0.61, 0.5)),
        "sine_inverse": NuMeasure.uniform(SineDiffeo(0.17, 0.5).inverse(),
                                          SineDiffeo(0.61, 0.5).inverse()),
    }


def best_time(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lanes", type=int, default=2048)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available()
    if "cython" not in backends:
        print("compiled kernels not built; timing numpy only")
    keys = stream_keys(0, args.lanes)
    offs = np.zeros(args.lanes, dtype=np.int64)
    x0 = np.linspace(0.0, 1.0, args.lanes, endpoint=False)
    y0 = (x0 + 0.5) % 1.0
    evals = args.lanes * args.steps

    print(f"{'family':<13} {'kernel':<11} {'backend':<7} {'seconds':>9} {'Meval/s':>9} {'speedup':>8}")
    for fname, nu in families().items():
        kinds, params, orient, cdf = nu.table
        jobs = {
            "compose": lambda m: m.compose(kinds, params, cdf, keys, offs, x0, args.steps,
                                           True, False),
            "track_pair": lambda m: m.track_pair(kinds, params, orient, cdf, keys, offs, x0, y0,
                                                 args.steps, 1e-6, 1e-9),
        }
        for jname, job in jobs.items():
            times = {b: best_time(lambda: job(m), args.repeat) for b, m in backends.items()}
            for b, t in times.items():
                speed = times["numpy"] / t
                print(f"{fname:<13} {jname:<11} {b:<7} {t:9.4f} {evals / t / 1e6:9.2f} "
                      f"{speed:7.1f}x")


if __name__ == "__main__":
    main()
