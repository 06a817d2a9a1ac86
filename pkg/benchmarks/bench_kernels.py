"""Compare the compiled and pure-Python kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are imported
directly, so the result does not depend on ``PLAYDIFF_PURE_PYTHON``.
"""
import argparse
import timeit

import numpy as np

from playdiff import _pykernels

try:
    from playdiff import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(n, rng):
    t = np.cumsum(rng.uniform(0.1, 1.0, n))
    u = np.cumsum(rng.normal(size=n))
    starts = np.linspace(t[0], t[-1] - 5.0, min(n, 2000))
    return {
        "play_nodes": lambda k: k.play_nodes(u, 0.7, 0.0),
        "project_stop": lambda k: k.project_stop(u, 0.7, 0.1),
        "window_oscillation": lambda k: k.window_oscillation(t, u, starts, 5.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'n':>8}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in cases(n, rng).items():
            tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
            if _ckernels is None:
                print(f"{name:<20}{n:>8}{tp:>14.5f}{'n/a':>14}{'n/a':>10}")
                continue
            ref, got = fn(_pykernels), fn(_ckernels)
            assert np.allclose(ref, got, rtol=0, atol=1e-12), name
            tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
            print(f"{name:<20}{n:>8}{tp:>14.5f}{tc:>14.5f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
