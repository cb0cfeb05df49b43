"""The compiled and numpy kernels must agree exactly on moves and closely on values."""
import os
import subprocess
import sys

import numpy as np
import pytest

from mnclust import _accel, _pykernels

ck = pytest.importorskip("mnclust._ckernels")


def _state(rng, d, T, K):
    x = rng.poisson(4, (d, T)).astype(np.float64)
    labels = np.r_[np.arange(K), rng.integers(0, K, T - K)].astype(np.int64)
    m = np.zeros((d, K))
    for t, l in enumerate(labels):
        m[:, l] += x[:, t]
    return x, m, np.bincount(labels, minlength=K).astype(np.int64), labels


def test_backend_selected():
    expected = "python" if os.environ.get("MNCLUST_PURE_PYTHON") else "cython"
    assert _accel.BACKEND == expected


def test_fallback_forced_by_environment():
    env = dict(os.environ, MNCLUST_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import mnclust; print(mnclust.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("q", [0.3, 0.5, 1.0])
def test_cluster_values_parity(rng, q):
    for _ in range(20):
        m = rng.poisson(5, (6, 4)).astype(float)
        m[:, 0] = 0.0
        assert np.allclose(ck.cluster_values(m, q), _pykernels.cluster_values(m, q), rtol=1e-12, atol=1e-9)


@pytest.mark.parametrize("q", [0.5, 1.0])
def test_refine_sweep_parity(rng, q):
    for _ in range(30):
        x, m, sizes, labels = _state(rng, 5, 12, 3)
        order = rng.permutation(12).astype(np.int64)
        a = (m.copy(), sizes.copy(), labels.copy())
        b = (m.copy(), sizes.copy(), labels.copy())
        na = ck.refine_sweep(x, a[0], a[1], a[2], order, q)
        nb = _pykernels.refine_sweep(x, b[0], b[1], b[2], order, q)
        assert na == nb
        assert np.array_equal(a[2], b[2]) and np.array_equal(a[1], b[1])
        assert np.allclose(a[0], b[0])


def test_pam_swap_parity(rng):
    for _ in range(30):
        pts = rng.normal(size=(15, 2))
        dist = np.ascontiguousarray(np.linalg.norm(pts[:, None] - pts[None], axis=2))
        med = rng.choice(15, 3, replace=False).astype(np.int64)
        a, b = med.copy(), med.copy()
        assert ck.pam_swap(dist, a) == _pykernels.pam_swap(dist, b)
        assert np.array_equal(a, b)
