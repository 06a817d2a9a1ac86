import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from playdiff import _pykernels, kernels

try:
    from playdiff import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
finite = st.floats(-50.0, 50.0, allow_nan=False)


def test_backend_name():
    assert kernels.BACKEND in ("python", "cython")
    assert (kernels.BACKEND == "cython") == (_ckernels is not None and not os.environ.get("PLAYDIFF_PURE_PYTHON"))


def test_environment_variable_forces_fallback():
    env = dict(os.environ, PLAYDIFF_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from playdiff import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_reference_kernels_on_small_input():
    u = np.array([0.0, 2.0, 1.0, 3.0, -1.0])
    assert np.array_equal(_pykernels.play_nodes(u, 0.5, 0.0), [0.0, 1.5, 1.5, 2.5, -0.5])
    assert np.array_equal(_pykernels.project_stop(u, 0.5, 2.0), [0.5, 0.5, -0.5, 0.5, -0.5])
    t = np.array([0.0, 1.0, 2.0, 3.0])
    v = np.array([0.0, 1.0, -1.0, 0.0])
    osc = _pykernels.window_oscillation(t, v, np.array([0.0, 0.5, 2.0]), 1.0)
    assert np.allclose(osc, [1.0, 1.0, 1.0])
    # an interior maximum and minimum both fall inside [0.5, 2.0]
    assert np.allclose(_pykernels.window_oscillation(t, v, np.array([0.5]), 1.5), [2.0])


def test_play_and_stop_kernels_are_complementary():
    rng = np.random.default_rng(0)
    u = np.cumsum(rng.normal(size=500))
    w = kernels.play_nodes(u, 0.8, u[0] - 0.3)
    z = kernels.project_stop(u, 0.8, 0.3)
    assert np.allclose(u - w, z, atol=1e-12)


@needs_ext
@given(arrays(float, st.integers(1, 60), elements=finite), st.floats(0.0, 5.0), finite)
def test_play_nodes_backends_agree(u, r, w0):
    assert np.array_equal(_ckernels.play_nodes(u, r, w0), _pykernels.play_nodes(u, r, w0))


@needs_ext
@given(arrays(float, st.integers(1, 60), elements=finite), st.floats(0.0, 5.0), finite)
def test_project_stop_backends_agree(u, r, z0):
    assert np.array_equal(_ckernels.project_stop(u, r, z0), _pykernels.project_stop(u, r, z0))


@needs_ext
@given(arrays(float, st.integers(2, 40), elements=finite), st.floats(0.0, 3.0))
def test_window_oscillation_backends_agree(v, eps):
    t = np.arange(len(v), dtype=float) * 0.37
    starts = np.linspace(t[0], t[-1], 17)
    a = _ckernels.window_oscillation(t, v, starts, eps)
    b = _pykernels.window_oscillation(t, v, starts, eps)
    assert np.allclose(a, b, rtol=0.0, atol=1e-12)
