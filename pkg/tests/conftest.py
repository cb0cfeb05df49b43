import numpy as np
import pytest

from mnclust.core import ClusterModel, validate_count_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_counts(rng, d, T, lam=5.0):
    a = rng.poisson(lam, size=(d, T))
    a[0, a.sum(axis=0) == 0] = 1
    return validate_count_matrix(a)


def random_model(rng, d, K, T, zeros=0):
    protos = rng.dirichlet(np.ones(d), size=K).T
    if zeros:
        for k in range(K):
            protos[rng.choice(d, zeros, replace=False), k] = 0.0
        protos /= protos.sum(axis=0)
    labels = np.concatenate([np.arange(K), rng.integers(0, K, T - K)])
    return ClusterModel(labels, protos)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
