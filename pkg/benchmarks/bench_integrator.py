"""Benchmark the RK4 delay-loop kernel: compiled vs pure-Python path.

The integrator's hot loop is sequential (each step reads the state one
delay in the past), so it cannot be vectorized; the compiled path is
the difference between seconds and minutes for production trace
lengths.  Run:

    python3 benchmarks/bench_integrator.py [--duration NS]
"""

import argparse
import time

import numpy as np

from chaoscomm import LaserParams, SimConfig, integrate_laser
from chaoscomm._kernels import USE_NUMBA, integrate_loop, integrate_loop_numpy


def time_loop(loop, params, config, repeats=3):
    import chaoscomm.laser as laser_mod
    from chaoscomm import _kernels
    saved = _kernels.integrate_loop
    best = float("inf")
    try:
        laser_mod.integrate_loop = loop
        for _ in range(repeats):
            t0 = time.perf_counter()
            trace = integrate_laser(params, config)
            best = min(best, time.perf_counter() - t0)
    finally:
        laser_mod.integrate_loop = saved
    return best, trace


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=120.0,
                    help="simulated span in ns (default 120)")
    args = ap.parse_args()

    params = LaserParams()
    config = SimConfig(duration=args.duration, transient=40.0)
    n_steps = int(round(config.duration / config.dt_ns))

    if not USE_NUMBA:
        print("note: compiled path disabled (CHAOSCOMM_NO_NUMBA is set); "
              "timing the interpreter loop against itself")

    # warm-up outside the timed region so JIT compilation is not billed
    integrate_laser(params, SimConfig(duration=9.0, transient=1.0))

    t_fast, tr_fast = time_loop(integrate_loop, params, config)
    t_ref, tr_ref = time_loop(integrate_loop_numpy, params, config, repeats=1)

    assert np.array_equal(tr_fast.samples, tr_ref.samples), \
        "compiled and reference loops disagree"

    rate_fast = n_steps / t_fast / 1e6
    rate_ref = n_steps / t_ref / 1e6
    print(f"steps per run:    {n_steps}")
    print(f"compiled loop:    {t_fast * 1e3:9.1f} ms   ({rate_fast:6.2f} Msteps/s)")
    print(f"interpreter loop: {t_ref * 1e3:9.1f} ms   ({rate_ref:6.2f} Msteps/s)")
    print(f"speedup:          {t_ref / t_fast:9.1f}x")


if __name__ == "__main__":
    main()
