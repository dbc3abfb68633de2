#!/usr/bin/env python3
"""Time the compiled integrator kernels against the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_integrators.py [--steps N] [--repeat K]

Each scheme integrates the driven half-frustrated cell (with noise where the
scheme supports it) for N steps, best of K repeats, identical seeds, so the
two backends do exactly the same arithmetic and the ratio is honest.
"""
import argparse
import math
import time

import numpy as np

import washboard as wb
from washboard import backend


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if "cython" not in backend.available_backends():
        raise SystemExit("compiled kernels are not built; nothing to compare")

    pot = wb.build_potential(wb.builtin_cell("1/2"), i_x=0.9,
                             omega_noise=0.2)
    x0 = (0.0, 0.0, -math.pi / 2)
    configs = {
        "overdamped": dict(scheme="overdamped", omega_noise=0.2),
        "underdamped": dict(scheme="underdamped", beta_c=1.5,
                            omega_noise=0.2),
        "hamiltonian": dict(scheme="hamiltonian", beta_c=1.0,
                            omega_noise=0.0),
    }

    print(f"{'scheme':<14}{'numpy [s]':>12}{'cython [s]':>12}"
          f"{'speedup':>10}{'steps/s (cython)':>20}")
    for name, kw in configs.items():
        cfg = wb.SimulationConfig(n_steps=args.steps, dt=1e-3, seed=1,
                                  record_stride=1000, **kw)
        v0 = np.zeros(3) if cfg.beta_c else None
        timings = {}
        for which in ("numpy", "cython"):
            timings[which] = best_time(
                lambda: wb.simulate(pot, cfg, x0=x0, v0=v0, backend=which),
                args.repeat)
        ratio = timings["numpy"] / timings["cython"]
        rate = args.steps / timings["cython"]
        print(f"{name:<14}{timings['numpy']:>12.3f}{timings['cython']:>12.3f}"
              f"{ratio:>9.1f}x{rate:>20,.0f}")

    # sanity: both backends must agree before a timing is meaningful
    cfg = wb.SimulationConfig(scheme="overdamped", n_steps=10000, seed=1,
                              omega_noise=0.2, record_stride=100)
    a = wb.simulate(pot, cfg, x0=x0, backend="numpy")
    b = wb.simulate(pot, cfg, x0=x0, backend="cython")
    worst = np.max(np.abs(a.states - b.states))
    print(f"\nbackend agreement on a shared-seed run: max |dx| = {worst:.2e}")


if __name__ == "__main__":
    main()
