"""Backend selection for the numerical kernels.

The compiled extension ``asymlab._kernels`` is used when it was built;
otherwise the pure-Python module ``asymlab._pykernels`` is loaded. Setting
``ASYMLAB_PURE=1`` forces the fallback. ``ASYMLAB_THREADS`` caps the number
of worker threads used by the batch routines (the compiled kernels release
the GIL, so chunks run in parallel; results do not depend on the split).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

if os.environ.get("ASYMLAB_PURE", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

safe_exp = _impl.safe_exp
logaddexp = _impl.logaddexp
logsubexp = _impl.logsubexp
log_lower_gamma = _impl.log_lower_gamma
log_upper_gamma = _impl.log_upper_gamma
log_gamma_increment = _impl.log_gamma_increment
log_width = _impl.log_width
log_expm1_ratio = _impl.log_expm1_ratio
segment_power_log = _impl.segment_power_log
segment_heat_log = _impl.segment_heat_log

_MIN_CHUNK = 256


def thread_count() -> int:
    raw = os.environ.get("ASYMLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _segment_args(arrays):
    kind, lc, alpha, lo, hi = arrays
    return (
        np.ascontiguousarray(kind, dtype=np.int64),
        np.ascontiguousarray(lc, dtype=np.float64),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
    )


def _run_chunked(func, seg, points, *extra):
    points = np.ascontiguousarray(points, dtype=np.float64)
    out = np.empty_like(points)
    workers = thread_count()
    if workers == 1 or BACKEND != "cython" or len(points) < 2 * _MIN_CHUNK:
        func(*seg, points, *extra, out)
        return out
    bounds = np.linspace(0, len(points), workers + 1).astype(int)

    def work(k):
        a, b = bounds[k], bounds[k + 1]
        func(*seg, points[a:b], *extra, out[a:b])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(work, range(workers)))
    return out


def heat_log_batch(arrays, log_lambdas, q: float) -> np.ndarray:
    """log of the heat integral at every ``exp(log_lambdas)``."""
    return _run_chunked(_impl.heat_log_batch, _segment_args(arrays), log_lambdas, float(q))


def partial_log_batch(arrays, log_ts) -> np.ndarray:
    """log of the partial integral up to every ``exp(log_ts)``."""
    return _run_chunked(_impl.partial_log_batch, _segment_args(arrays), log_ts)


def evaluate_log_batch(arrays, log_ts) -> np.ndarray:
    return _run_chunked(_impl.evaluate_log_batch, _segment_args(arrays), log_ts)


def cumsimpson(u, f) -> np.ndarray:
    """Running integral of ``f`` over increasing nodes ``u`` (fourth order, nonnegative weights)."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty_like(u)
    if len(u) == 0:
        return out
    _impl.cumsimpson(u, f, out)
    return out
