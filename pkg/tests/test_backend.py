"""The compiled core and the numpy fallback must agree."""

import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapfit import _pycore
from lyapfit.kernel import WendlandKernel

ext = pytest.importorskip("lyapfit._ext")


def _data(seed, n=40, m=25, d=2):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, (n, d)), rng.uniform(-1, 1, (m, d)), rng.normal(size=(m, d))


@pytest.mark.parametrize("k", [2, 3])
def test_matrices_agree(k):
    X, Q, V = _data(0)
    K = WendlandKernel(2, k, c=0.7)
    p0, p1, p2 = K.profiles
    for name, args in [("kernel_matrix", (X, Q, K.c, p0)),
                       ("orbital_gram", (Q, V, K.c, p1, p2)),
                       ("orbital_cross", (X, Q, V, K.c, p1))]:
        a, b = getattr(ext, name)(*args), getattr(_pycore, name)(*args)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15 * np.abs(b).max()), name


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 3), grad=st.booleans())
def test_expansion_agrees(seed, d, grad):
    X, Q, V = _data(seed, d=d)
    rng = np.random.default_rng(seed + 1)
    G = rng.uniform(-1, 1, (7, d))
    b, g = rng.normal(size=len(Q)), rng.normal(size=7)
    K = WendlandKernel(d, 2, c=0.9)
    args = (X, Q, V, b, G, g, K.c, *K.profiles, grad)
    va, ga = ext.expansion(*args)
    vb, gb = _pycore.expansion(*args)
    assert np.allclose(va, vb, rtol=1e-12, atol=1e-14)
    if grad:
        assert np.allclose(ga, gb, rtol=1e-12, atol=1e-14)
    else:
        assert ga is None and gb is None


def test_profile_agrees():
    K = WendlandKernel(3, 2)
    s = np.linspace(0, 1.2, 101)
    for prof in K.profiles:
        assert np.allclose(ext.profile(s, *prof), _pycore.profile(s, *prof), rtol=1e-14, atol=0)


def test_nearest_counts_agree():
    samples, sites, _ = _data(5, n=5000, m=60)
    assert np.array_equal(ext.nearest_counts(samples, sites), _pycore.nearest_counts(samples, sites))


def test_ties_go_to_lowest_index():
    sites = np.array([[0.0], [1.0]])
    samples = np.array([[0.5]])
    assert ext.nearest_counts(samples, sites).tolist() == [1, 0]
    assert _pycore.nearest_counts(samples, sites).tolist() == [1, 0]


def test_environment_forces_fallback():
    env = dict(os.environ, LYAPFIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import lyapfit; print(lyapfit.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert importlib.import_module("lyapfit").BACKEND in ("cython", "python")
