"""Compare the numba and numpy match kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times one generation's match play (every edge of the torus) at desk and
full scale, and checks both backends return identical outcome counts.
"""

import argparse
import time

import numpy as np

from defectors import _kernels as k
from defectors.evolution import Grid

SCALES = {"desk (20x20, 50 rounds)": (20, 20, 50), "full (50x50, 200 rounds)": (50, 50, 200)}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)

    if k.HAVE_NUMBA:
        # compile outside the timed region
        k.count_outcomes_numba(np.zeros((9, 71), np.uint8), np.array([0]), np.array([1]), 5)

    print(f"{'scale':28s} {'numpy ms':>10s} {'numba ms':>10s} {'speed-up':>9s}  equal")
    for label, (w, h, rounds) in SCALES.items():
        bias = rng.random((w * h, 1))
        pop = (rng.random((w * h, 71)) < bias).astype(np.uint8)
        ea, eb = Grid(w, h, pop).edge_arrays
        t_np, c_np = best_of(lambda: k.count_outcomes_numpy(pop, ea, eb, rounds), args.repeat)
        if k.HAVE_NUMBA:
            t_nb, c_nb = best_of(lambda: k.count_outcomes_numba(pop, ea, eb, rounds), args.repeat)
            same = bool(np.array_equal(c_np, c_nb))
            print(f"{label:28s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.1f}x  {same}")
        else:
            print(f"{label:28s} {t_np * 1e3:10.2f} {'n/a':>10s} {'':>9s}  numba not installed")


if __name__ == "__main__":
    main()
