"""Compare the compiled core with the numpy fallback on the hot kernels.

Run with ``python3 benchmarks/bench_core.py [--repeat N]``. Each routine is
timed on both backends with identical inputs; the outputs are checked to
agree before the timings are reported.
"""

import argparse
import timeit

import numpy as np

from lyapfit import _pycore
from lyapfit.geometry import Ball, Box, make_grid
from lyapfit.kernel import WendlandKernel

try:
    from lyapfit import _ext
except ImportError:  # pragma: no cover
    _ext = None


def cases():
    rng = np.random.default_rng(0)
    K1 = WendlandKernel(2, 2, c=1 / 1.7)
    K2 = WendlandKernel(2, 2, c=1 / 5.66)
    sites = rng.uniform(-1, 1, (1000, 2))
    q = make_grid(Box([-1, -1], [1, 1]), 0.1, Ball([0, 0], 0.2))
    v = rng.normal(size=q.shape)
    b = rng.normal(size=len(q))
    grid = make_grid(Box([-1, -1], [1, 1]), 0.05, Ball([0, 0], 0.2))
    empty = np.zeros((0, 2))
    samples = rng.uniform(-1, 1, (2**16, 2))
    p0, p1, p2 = K2.profiles
    return {
        "kernel_matrix (1000 x 1000)": ("kernel_matrix", (sites, sites, K1.c, K1.profiles[0])),
        f"orbital_gram ({len(q)} x {len(q)})": ("orbital_gram", (q, v, K2.c, p1, p2)),
        f"expansion + gradient ({len(grid)} points)":
            ("expansion", (grid, q, v, b, empty, np.zeros(0), K2.c, p0, p1, p2, True)),
        "nearest_counts (65536 samples, 1000 sites)": ("nearest_counts", (samples, sites)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _ext is None:
        print("compiled core not built; only the numpy fallback is available")
        return
    print(f"{'routine':48s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speed-up':>9s}")
    for label, (name, fargs) in cases().items():
        fast, slow = getattr(_ext, name), getattr(_pycore, name)
        a, b = fast(*fargs), slow(*fargs)
        a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14 * np.abs(b).max()), name
        tf = min(timeit.repeat(lambda: fast(*fargs), number=1, repeat=args.repeat))
        ts = min(timeit.repeat(lambda: slow(*fargs), number=1, repeat=args.repeat))
        print(f"{label:48s} {tf:11.4f} {ts:11.4f} {ts / tf:8.1f}x")


if __name__ == "__main__":
    main()
