"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--points N] [--repeat R]``.
Each batch routine is timed on both backends with identical inputs and the
largest absolute difference between their outputs is reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from asymlab import _pykernels
from asymlab.profiles import make_counterexample, make_root, segment_arrays

try:
    from asymlab import _kernels
except ImportError:  # extension not built
    _kernels = None


def _arrays(profile, n_segments):
    segs = profile.first_segments(n_segments) if profile.generated else list(profile.segments)
    kind, lc, alpha, lo, hi = segment_arrays(segs)
    return (
        np.ascontiguousarray(kind, dtype=np.int64),
        np.ascontiguousarray(lc, dtype=np.float64),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
    )


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    pts = np.linspace(0.0, 300.0, args.points)
    cases = [
        ("heat root(2), q=1", _arrays(make_root(2.0), 0), "heat_log_batch", (1.0,)),
        ("heat counterexample, 12 segments, q=1", _arrays(make_counterexample(), 12), "heat_log_batch", (1.0,)),
        ("partial counterexample, 12 segments", _arrays(make_counterexample(), 12), "partial_log_batch", ()),
        ("evaluate counterexample, 12 segments", _arrays(make_counterexample(), 12), "evaluate_log_batch", ()),
    ]
    print(f"points={args.points} repeat={args.repeat} compiled={'yes' if _kernels else 'no'}")
    print(f"{'case':42s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, seg, name, extra in cases:
        def run(mod):
            out = np.empty_like(pts)
            getattr(mod, name)(*seg, pts, *extra, out)
            return out

        t_py, out_py = _time(lambda: run(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{label:42s} {t_py:11.4f} {'-':>11s} {'-':>8s} {'-':>11s}")
            continue
        t_cy, out_cy = _time(lambda: run(_kernels), args.repeat)
        both = np.isfinite(out_py) & np.isfinite(out_cy)
        diff = float(np.max(np.abs(out_py[both] - out_cy[both]))) if both.any() else 0.0
        print(f"{label:42s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f} {diff:11.3g}")

    u = np.linspace(0.0, 300.0, args.points * 10)
    f = np.sin(u)

    def trap(mod):
        out = np.empty_like(u)
        mod.cumsimpson(u, f, out)
        return out

    t_py, a = _time(lambda: trap(_pykernels), args.repeat)
    if _kernels is not None:
        t_cy, b = _time(lambda: trap(_kernels), args.repeat)
        print(f"{'cumsimpson':42s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f} {float(np.max(np.abs(a - b))):11.3g}")


if __name__ == "__main__":
    main()
