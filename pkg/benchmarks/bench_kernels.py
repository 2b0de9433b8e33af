"""Time the Euler kernels compiled by numba against the same source run as numpy.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]

The numpy path is the ``py_func`` of each jitted kernel, so both columns run
identical code; the final states are compared to make sure they agree.
"""

import argparse
import time

import numpy as np

from pilotlab import kernels
from pilotlab._accel import NUMBA_ENABLED
from pilotlab.optimizers import init_pair, make_initial_x
from pilotlab.problems import gen_underdetermined


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_pair(steps, repeat, n=100, d=40):
    pr = gen_underdetermined(0, n, d, 5)
    st = init_pair(make_initial_x(1, n), 1.0)
    alphas = 0.01 * np.ones(steps)
    args = (pr.Z, pr.Y, st.m.copy(), st.w.copy(), alphas, 1e-4)
    jit_fn = kernels.pair_trajectory
    py_fn = getattr(jit_fn, "py_func", jit_fn)
    jit_fn(*args[:4], alphas[:2], 1e-4)  # compile outside the timing
    t_jit, (m1, w1) = _best_of(lambda: jit_fn(*args), repeat)
    t_py, (m2, w2) = _best_of(lambda: py_fn(*args), repeat)
    return t_jit, t_py, float(np.max(np.abs(m1 * w1 - m2 * w2)))


def bench_train_loop(steps, repeat, n=100, d=40, record_every=100):
    pr = gen_underdetermined(0, n, d, 5)
    st = init_pair(make_initial_x(1, n), 1.0)
    alphas = 0.01 * np.ones(steps)
    R = steps // record_every + 1

    def call(fn, T):
        bufs = [np.zeros(R) for _ in range(6)]
        x_r, g_r = np.zeros((R, n)), np.zeros((R, n))
        fn(kernels.PAIR, pr.Z, pr.Y, pr.x_star, st.m.copy(), st.w.copy(), alphas, False,
           0.0, 1.0, 0.0, T / 2, 1e-4, T, record_every, 1e-3, False,
           *bufs, x_r, g_r, np.zeros(n, dtype=np.int64), np.zeros(n))
        return x_r[T // record_every]

    jit_fn = kernels.train_loop
    py_fn = getattr(jit_fn, "py_func", jit_fn)
    call(jit_fn, record_every)
    t_jit, x1 = _best_of(lambda: call(jit_fn, steps), repeat)
    t_py, x2 = _best_of(lambda: call(py_fn, steps), repeat)
    return t_jit, t_py, float(np.max(np.abs(x1 - x2)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not NUMBA_ENABLED:
        print("numba disabled (PILOTLAB_NUMBA=0 or not installed): both columns run numpy")
    print(f"{'kernel':<14}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max diff':>11}")
    for name, fn in (("pair", bench_pair), ("train_loop", bench_train_loop)):
        t_jit, t_py, diff = fn(args.steps, args.repeat)
        print(f"{name:<14}{t_jit:>10.4f}{t_py:>10.4f}{t_py / t_jit:>8.1f}x{diff:>11.2e}")


if __name__ == "__main__":
    main()
