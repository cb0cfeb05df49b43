import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mnclust.core import DimensionMismatch, MnclustError, RankOutOfRange
from mnclust.lowrank import (
    TruncationParams,
    clip_negatives,
    normalize_columns,
    projection_mse,
    reduced_rank_projection,
    truncate_counts,
    truncated_projection,
)

matrices = arrays(np.float64, st.tuples(st.integers(2, 7), st.integers(2, 7)),
                  elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False))


def test_exact_recovery_of_low_rank(rng):
    m = rng.normal(size=(8, 2)) @ rng.normal(size=(2, 6))
    assert np.allclose(reduced_rank_projection(m, 2), m)


def test_full_rank_is_identity(rng):
    m = rng.normal(size=(5, 4))
    assert np.allclose(reduced_rank_projection(m, 4), m)


@settings(max_examples=40, deadline=None)
@given(matrices, st.data())
def test_eckart_young_beats_random_competitors(m, data):
    k = data.draw(st.integers(1, min(m.shape)))
    best = np.linalg.norm(m - reduced_rank_projection(m, k))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**16)))
    for _ in range(20):
        other = rng.normal(size=(m.shape[0], k)) @ rng.normal(size=(k, m.shape[1]))
        assert best <= np.linalg.norm(m - other) + 1e-9
    # error equals the tail singular values
    s = np.linalg.svd(m, compute_uv=False)
    assert np.isclose(best, np.sqrt(np.sum(s[k:] ** 2)), atol=1e-8)


def test_rank_bounds():
    with pytest.raises(RankOutOfRange):
        reduced_rank_projection(np.ones((3, 4)), 4)
    with pytest.raises(RankOutOfRange):
        reduced_rank_projection(np.ones((3, 4)), 0)


def test_clip_and_normalize():
    m = np.array([[1.0, -1.0, 0.0], [3.0, -2.0, 0.0]])
    c = clip_negatives(m)
    assert c.min() == 0.0
    p = normalize_columns(c)
    assert np.allclose(p[:, 0], [0.25, 0.75])
    assert np.allclose(p[:, 1], 0.5) and np.allclose(p[:, 2], 0.5)
    with pytest.raises(MnclustError):
        normalize_columns(m)


def test_truncation():
    x = np.array([[1, 10], [5, 2]])
    assert truncate_counts(x, 4).tolist() == [[1, 4], [4, 2]]
    with pytest.raises(MnclustError):
        TruncationParams(0, 1)


def test_truncation_at_max_is_noop(rng):
    x = rng.poisson(3, (10, 6))
    a = truncated_projection(x, TruncationParams(float(x.max()), 2))
    assert np.allclose(a, reduced_rank_projection(x.astype(float), 2))


def test_projection_mse():
    assert projection_mse(np.zeros((2, 2)), np.ones((2, 2))) == 1.0
    with pytest.raises(DimensionMismatch):
        projection_mse(np.zeros((2, 2)), np.zeros((2, 3)))
