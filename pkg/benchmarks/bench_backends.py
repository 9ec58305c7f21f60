"""Timing comparison of the compiled kernels against the pure-Python
reference.

Usage: python3 benchmarks/bench_backends.py [--steps 10000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from s2body import _kernels_py
from s2body.analysis import find_relative_equilibrium
from s2body.dynamics import Body, Configuration

try:
    from s2body import _kernels_c
except ImportError:
    _kernels_c = None

COT_GUARD = _kernels_py.COT_GUARD


def ring_state(n):
    """Ring at its balance rate: the run is rigid, so it never aborts and
    both backends do the full step count."""
    ang = 2.0 * np.pi * np.arange(n) / n
    s = np.sin(np.pi / 4.0)
    c = np.cos(np.pi / 4.0)
    q = np.column_stack([s * np.cos(ang), s * np.sin(ang), np.full(n, c)])
    template = Configuration([Body(1.0, qi, np.zeros(3)) for qi in q])
    w, _ = find_relative_equilibrium(template, np.array([0.0, 0.0, 1.0]),
                                     (0.1, 50.0))
    v = w * np.cross(np.array([0.0, 0.0, 1.0]), q)
    return np.ones(n), q, v, np.ones(n)


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = []
    for n in (3, 5, 8):
        m, q, v, r = ring_state(n)
        call = (m, q, v, r, 1e-3, args.steps, True, 0, COT_GUARD)
        t_py = best_of(args.repeat, _kernels_py.nbody_rk4, *call)
        t_c = best_of(args.repeat, _kernels_c.nbody_rk4, *call) \
            if _kernels_c else None
        rows.append((f"nbody_rk4 N={n}", t_py, t_c))

    I = np.array([1.0, 2.0, 3.0])
    om0 = np.array([0.4, 1.0, 0.2])
    t_py = best_of(args.repeat, _kernels_py.euler_rk4, I, om0, 1e-3, args.steps)
    t_c = best_of(args.repeat, _kernels_c.euler_rk4, I, om0, 1e-3, args.steps) \
        if _kernels_c else None
    rows.append(("euler_rk4", t_py, t_c))

    print(f"{args.steps} RK4 steps, best of {args.repeat}")
    print(f"{'kernel':<16} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, py, c in rows:
        if c is None:
            print(f"{name:<16} {py:>9.4f}s {'n/a':>10} {'n/a':>8}")
        else:
            print(f"{name:<16} {py:>9.4f}s {c:>9.4f}s {py / c:>7.1f}x")
    if _kernels_c is None:
        print("compiled extension not built; install with the C toolchain "
              "available to compare")


if __name__ == "__main__":
    main()
