"""Benchmark the compiled flow runners against the pure-python fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from rotcubics._kernels import BACKEND, _fallback

try:
    from rotcubics._kernels import _native
except ImportError:
    _native = None


def _initial_rows():
    nhp = np.concatenate([[0.3, -0.2, 0.9], [1.0, 0.0, 0.2], [0.0, 0.5, 0.0], np.eye(3).ravel()])
    sphere = np.concatenate([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    lp1 = np.concatenate([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    return {"nhp": nhp, "sphere_cubic": sphere, "lp1": lp1}


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run(steps: int, repeat: int) -> None:
    rows = _initial_rows()
    dt = 1e-3
    eye = np.eye(3)
    cases = {
        "nhp": lambda mod: mod.run_nhp(rows["nhp"], steps, dt),
        "ep2": lambda mod: mod.run_ep2(rows["nhp"], steps, dt, eye, eye),
        "sphere_cubic": lambda mod: mod.run_sphere_cubic(rows["sphere_cubic"], steps, dt),
        "lp1": lambda mod: mod.run_lp1(rows["lp1"], steps, dt),
    }
    print(f"active backend: {BACKEND}; {steps} RK4 steps per flow, best of {repeat}")
    print(f"{'flow':<14}{'python [s]':>12}{'native [s]':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py = _time(lambda: call(_fallback), repeat)
        if _native is not None:
            t_nat = _time(lambda: call(_native), repeat)
            print(f"{name:<14}{t_py:>12.4f}{t_nat:>12.4f}{t_py / t_nat:>10.1f}x")
        else:
            print(f"{name:<14}{t_py:>12.4f}{'n/a':>12}{'n/a':>10}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    run(args.steps, args.repeat)


if __name__ == "__main__":
    main()
