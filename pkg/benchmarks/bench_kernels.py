"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from mnclust import _pykernels

try:
    from mnclust import _ckernels
except ImportError:
    _ckernels = None


def _refine_case(rng, d=50, T=400, K=6):
    x = rng.poisson(3, (d, T)).astype(np.float64)
    labels = np.r_[np.arange(K), rng.integers(0, K, T - K)].astype(np.int64)
    m = np.zeros((d, K))
    for t, l in enumerate(labels):
        m[:, l] += x[:, t]
    sizes = np.bincount(labels, minlength=K).astype(np.int64)
    order = rng.permutation(T).astype(np.int64)
    return x, m, sizes, labels, order


def bench(repeat: int = 5):
    rng = np.random.default_rng(0)
    x, m, sizes, labels, order = _refine_case(rng)
    pts = rng.normal(size=(300, 3))
    dist = np.ascontiguousarray(np.linalg.norm(pts[:, None] - pts[None], axis=2))
    med = rng.choice(300, 8, replace=False).astype(np.int64)
    cv = rng.poisson(20, (200, 40)).astype(float)

    cases = {
        "cluster_values q=0.5": lambda k: k.cluster_values(cv, 0.5),
        "refine_sweep q=1": lambda k: k.refine_sweep(x, m.copy(), sizes.copy(), labels.copy(), order, 1.0),
        "refine_sweep q=0.5": lambda k: k.refine_sweep(x, m.copy(), sizes.copy(), labels.copy(), order, 0.5),
        "pam_swap": lambda k: k.pam_swap(dist, med.copy()),
    }
    print(f"{'kernel':<22}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases.items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<22}{py:>12.2f}{'n/a':>12}{'':>10}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=repeat)) * 1e3
        print(f"{name:<22}{py:>12.2f}{cy:>12.2f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    bench(ap.parse_args().repeat)
