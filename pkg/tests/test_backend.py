import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isotropy import _backend

compiled = _backend.compiled_kernels
python = _backend.python_kernels
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")

LAGS = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 1.0], [2.5, -0.5]])


def _inputs(seed, n, lattice):
    rng = np.random.default_rng(seed)
    locs = rng.integers(0, 8, (n, 2)).astype(float) if lattice else rng.uniform(0, 8, (n, 2))
    locs = np.unique(locs, axis=0)
    return np.ascontiguousarray(locs), rng.standard_normal(len(locs))


@needs_ext
class TestParity:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 150), st.booleans(), st.sampled_from([0, 1, 2]), st.floats(0.05, 2.0))
    def test_kernel_sums(self, seed, n, lattice, family, bw):
        locs, vals = _inputs(seed, n, lattice)
        reach = 1.5 if family == 0 else 1.0
        a = compiled.kernel_sums(locs, vals, LAGS, family, bw, reach)
        b = python.kernel_sums(locs, vals, LAGS, family, bw, reach)
        for x, y in zip(a, b):
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 150), st.booleans(), st.floats(1.0, 45.0))
    def test_directional_sums(self, seed, n, lattice, tol):
        locs, vals = _inputs(seed, n, lattice)
        angles = np.array([0.0, 45.0, 90.0, 135.0])
        edges = np.linspace(0, 6, 9)
        s1, c1 = compiled.directional_sums(locs, vals, angles, tol, edges)
        s2, c2 = python.directional_sums(locs, vals, angles, tol, edges)
        np.testing.assert_array_equal(c1, c2)
        np.testing.assert_allclose(s1, s2, rtol=1e-12, atol=1e-14)

    def test_read_only_inputs(self):
        locs, vals = _inputs(0, 30, False)
        locs.setflags(write=False)
        vals.setflags(write=False)
        compiled.kernel_sums(locs, vals, LAGS, 0, 0.7, 1.5)


def test_pure_python_switch():
    env = dict(os.environ, ISOTROPY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import isotropy; print(isotropy.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


def test_default_backend_reported():
    assert _backend.BACKEND in ("cython", "python")
    assert (_backend.BACKEND == "cython") == (compiled is not None)
