import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymlab import _pykernels, kernels

compiled = pytest.importorskip("asymlab._kernels", reason="compiled extension not built")

finite = st.floats(-50, 50)


def _same(a, b, rel=1e-13):
    if np.isinf(a) or np.isinf(b) or np.isnan(a) or np.isnan(b):
        return a == b or (np.isnan(a) and np.isnan(b))
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


@settings(max_examples=300)
@given(st.floats(0.05, 20), st.floats(-20, 8))
def test_incomplete_gamma_parity(a, lx):
    assert _same(compiled.log_lower_gamma(a, lx), _pykernels.log_lower_gamma(a, lx))
    assert _same(compiled.log_upper_gamma(a, lx), _pykernels.log_upper_gamma(a, lx))


@settings(max_examples=300)
@given(st.floats(0.05, 20), st.floats(-20, 8), st.floats(0, 5))
def test_gamma_increment_parity(a, l1, width):
    assert _same(compiled.log_gamma_increment(a, l1, l1 + width),
                 _pykernels.log_gamma_increment(a, l1, l1 + width))


@pytest.mark.parametrize("mod", [compiled, _pykernels], ids=["compiled", "python"])
def test_gamma_increment_subnormal_width(mod):
    # int_1^(e^w) e^-u du ~ w / e for a subnormal log-width w
    w = 5e-324
    assert mod.log_gamma_increment(1.0, 0.0, w) == pytest.approx(math.log(w) - 1.0, rel=1e-12)


@settings(max_examples=300)
@given(st.integers(0, 1), finite, st.floats(0.1, 3), st.floats(-20, 20), st.floats(0.01, 10),
       finite, st.floats(0.25, 3))
def test_segment_kernels_parity(kind, lc, alpha, lo, width, llam, q):
    hi = lo + width
    assert _same(compiled.segment_power_log(kind, lc, alpha, lo, hi, q),
                 _pykernels.segment_power_log(kind, lc, alpha, lo, hi, q))
    assert _same(compiled.segment_heat_log(kind, lc, alpha, lo, hi, llam, q),
                 _pykernels.segment_heat_log(kind, lc, alpha, lo, hi, llam, q))


def test_batch_parity_and_threading(monkeypatch):
    from asymlab.profiles import make_counterexample, segment_arrays

    seg = kernels._segment_args(segment_arrays(make_counterexample().first_segments(10)))
    pts = np.linspace(-5, 300, 3001)
    py = np.empty_like(pts)
    _pykernels.heat_log_batch(*seg, pts, 1.0, py)
    cy = kernels.heat_log_batch(seg, pts, 1.0)
    assert np.allclose(py, cy, rtol=1e-13, atol=0)
    monkeypatch.setenv("ASYMLAB_THREADS", "4")
    assert np.array_equal(kernels.heat_log_batch(seg, pts, 1.0), cy)


@settings(max_examples=100)
@given(st.lists(st.floats(1e-3, 2.0), min_size=1, max_size=60), st.integers(0, 2**32 - 1))
def test_cumsimpson_parity(steps, seed):
    u = np.concatenate([[0.0], np.cumsum(steps)])
    f = np.random.default_rng(seed).normal(size=len(u))
    out = np.empty_like(u)
    _pykernels.cumsimpson(u, f, out)
    assert np.allclose(kernels.cumsimpson(u, f), out, rtol=1e-13, atol=1e-13)


def test_pure_backend_selected_by_environment():
    env = dict(os.environ, ASYMLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import asymlab; print(asymlab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND == "cython"
