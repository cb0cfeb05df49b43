import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mnclust.core import LengthMismatch, MnclustError
from mnclust.metrics import (
    adjusted_rand_index,
    column_entropies,
    contingency,
    entropy,
    kl_divergence,
    theorem1_limit_constant,
    weighted_discrepancy_phi,
)


def _ari_by_pairs(a, b):
    # direct pair counting, independent of the contingency formula
    n = len(a)
    pairs = list(itertools.combinations(range(n), 2))
    both = sum(a[i] == a[j] and b[i] == b[j] for i, j in pairs)
    in_a = sum(a[i] == a[j] for i, j in pairs)
    in_b = sum(b[i] == b[j] for i, j in pairs)
    total = len(pairs)
    expected = in_a * in_b / total
    top = (in_a + in_b) / 2
    if top == expected:
        return 1.0
    return (both - expected) / (top - expected)


labelings = st.integers(2, 8).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                        st.lists(st.integers(0, 3), min_size=n, max_size=n)))


@settings(max_examples=300, deadline=None)
@given(labelings)
def test_ari_matches_pair_counting(pair):
    a, b = pair
    assert math.isclose(adjusted_rand_index(a, b), _ari_by_pairs(a, b), abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(labelings, st.permutations(range(4)))
def test_ari_invariant_to_relabeling_and_symmetric(pair, perm):
    a, b = pair
    pb = [perm[v] for v in b]
    assert math.isclose(adjusted_rand_index(a, b), adjusted_rand_index(a, pb), abs_tol=1e-12)
    assert math.isclose(adjusted_rand_index(a, b), adjusted_rand_index(b, a), abs_tol=1e-12)


def test_ari_known_values():
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert adjusted_rand_index([0, 0, 0, 0], [0, 0, 0, 0]) == 1.0
    assert adjusted_rand_index([0, 1, 2], [0, 1, 2]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def test_ari_matches_sklearn():
    sk = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.integers(0, 4, 20), rng.integers(0, 3, 20)
        assert math.isclose(adjusted_rand_index(a, b), sk.adjusted_rand_score(a, b), abs_tol=1e-12)


def test_ari_errors():
    with pytest.raises(LengthMismatch):
        adjusted_rand_index([0, 1], [0, 1, 1])
    with pytest.raises(MnclustError):
        adjusted_rand_index([0], [0])


def test_contingency():
    assert contingency([0, 0, 1], [5, 7, 7]).tolist() == [[1, 1], [0, 1]]


def test_entropy_and_kl():
    assert np.isclose(entropy([0.5, 0.5, 0.0]), math.log(2))
    assert np.allclose(column_entropies(np.array([[1.0, 0.5], [0.0, 0.5]])), [0.0, math.log(2)])
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    with pytest.raises(LengthMismatch):
        kl_divergence([1.0], [0.5, 0.5])


def test_kl_nonnegative(rng):
    for _ in range(50):
        p, q = rng.dirichlet(np.ones(5), 2)
        assert kl_divergence(p, q) >= 0


def test_phi_at_truth_is_weighted_entropy():
    q = np.array([[0.5, 1.0], [0.5, 0.0]])
    n = np.array([10, 20])
    val = weighted_discrepancy_phi(q, q * n, n, [0, 1], 2)
    assert np.isclose(val, math.log(2))


def test_limit_constant():
    assert theorem1_limit_constant([5, 5], [1, 1], [1, 1]) == 4.0
    assert theorem1_limit_constant([3], [2], [0.5]) == 1.0
    with pytest.raises(LengthMismatch):
        theorem1_limit_constant([1, 2], [1], [1])
    with pytest.raises(MnclustError):
        theorem1_limit_constant([0], [1], [1])
