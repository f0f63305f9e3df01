"""Compiled vs pure-Python enumeration kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

from motivic import _pykernels
from motivic.hecke import field_tables

try:
    from motivic import _kernels
except ImportError:
    _kernels = None


def simplex_levels(size):
    # y >= 0, y0 + y1 + y2 <= size; each level carries its projected bounds
    return [
        [(0, 1, 0, 0), (size, -1, 0, 0)],
        [(0, 0, 1, 0), (size, -1, -1, 0)],
        [(0, 0, 0, 1), (size, -1, -1, -1)],
    ]


CASES = {
    "count_levels simplex 60": ("count_levels", (simplex_levels(60), 3)),
    "count_levels simplex 200": ("count_levels", (simplex_levels(200), 3)),
    "valuation_histogram q=3 N=4": ("valuation_histogram", None),
    "valuation_histogram q=4 N=3": ("valuation_histogram", None),
}


def _hist_args(q0, N):
    add, mul = field_tables(q0)
    return (add, mul, -1, 0, N, 1, N)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the Python timings are shown")
    print(f"{'case':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, (fn, fargs) in CASES.items():
        if fargs is None:
            q0, N = (3, 4) if "q=3" in name else (4, 3)
            fargs = _hist_args(q0, N)
        py = getattr(_pykernels, fn)
        t_py = min(timeit.repeat(lambda: py(*fargs), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:32s} {t_py:10.2f} {'-':>10s} {'-':>8s}")
            continue
        cy = getattr(_kernels, fn)
        assert cy(*fargs) == py(*fargs), f"backends disagree on {name}"
        t_cy = min(timeit.repeat(lambda: cy(*fargs), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
