"""Compare the compiled and pure-Python kernels of the autonomous system.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--t-span 10]

Times one backward shot from the default start direction with each backend
and checks that both reach the same end state.
"""

import argparse
import time

import numpy as np

from javelin import _backend, shooting


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--t-span", type=float, default=10.0)
    parser.add_argument("--theta", type=float, default=1.4)
    args = parser.parse_args(argv)

    x0 = shooting.initial_state(args.theta, 1e-3)
    py = _backend.get("python")
    try:
        cy = _backend.get("cython")
    except ImportError:
        cy = None

    def shot(mod):
        return lambda: mod.integrate_as(x0, 0.0, -args.t_span, 1e-9, 1e-11)

    t_py, out_py = best_of(shot(py), args.repeat)
    print(f"python : {t_py * 1e3:9.3f} ms  ({len(out_py[0]) - 1} steps)")
    if cy is None:
        print("cython : not built")
        return
    t_cy, out_cy = best_of(shot(cy), args.repeat)
    print(f"cython : {t_cy * 1e3:9.3f} ms  ({len(out_cy[0]) - 1} steps)")
    print(f"speedup: {t_py / t_cy:9.1f}x")
    diff = np.max(np.abs(out_py[1][-1] - out_cy[1][-1]) / (1 + np.abs(out_py[1][-1])))
    print(f"end-state relative difference: {diff:.2e}")


if __name__ == "__main__":
    main()
