"""Monte Carlo harnesses behind the CLI and the acceptance suite.

Replicate ``r`` always uses ``base_seed + r``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import elbow_kmeans, pam_silhouette
from .core import ClusterModel, CountMatrix, CriterionParams, validate_count_matrix
from .datagen import (
    aggregate_graph,
    block_groups,
    block_poisson_graphs,
    default_block_specs,
    default_sbm_specs,
    planted_multinomial,
    sbm_graphs,
    two_cluster_sparse,
    vectorize_graphs,
)
from .factorize import NmfParams
from .lowrank import TruncationParams, projection_mse, reduced_rank_projection, truncated_projection
from .metrics import adjusted_rand_index, theorem1_limit_constant, weighted_discrepancy_phi
from .selection import delta, discrepancy, merge_last_two, split_last, sweep

DEFAULT_CRITERION = CriterionParams()


def replicate_map(fn, reps: int, seed: int, workers: int = 1) -> list:
    """``[fn(seed + r) for r in range(reps)]``, optionally on a thread pool; order is by ``r``."""
    seeds = [seed + r for r in range(reps)]
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


# --- zero-aware penalty versus AIC on sparse two-cluster data -----------------


@dataclass(frozen=True)
class SuccessRow:
    d: int
    delta_successes: int
    aic_successes: int
    reps: int


def sparse_success_row(d: int, reps: int = 100, seed: int = 0, n_trials: int = 200,
               criterion: CriterionParams = DEFAULT_CRITERION, workers: int = 1) -> SuccessRow:
    def one(s):
        x, _ = two_cluster_sparse(d, n_trials, seed=s)
        nmf = NmfParams(seed=s)
        return (sweep(x, [1, 2], criterion, nmf).chosen_k == 2,
                sweep(x, [1, 2], criterion, nmf, kind="AIC").chosen_k == 2)

    hits = np.array(replicate_map(one, reps, seed, workers), dtype=int).reshape(-1, 2)
    return SuccessRow(d, int(hits[:, 0].sum()), int(hits[:, 1].sum()), reps)


def sparse_success_table(d_list, reps: int = 100, seed: int = 0, **kw) -> list[SuccessRow]:
    return [sparse_success_row(d, reps, seed, **kw) for d in d_list]


# --- graph clustering experiments ------------------------------------------------


@dataclass(frozen=True)
class GraphRow:
    setting: str
    ours: float
    pam: float
    elbow: float
    reps: int


def _ours_labels(x: CountMatrix, k_max: int, seed: int, criterion: CriterionParams) -> np.ndarray:
    rep = sweep(x, range(1, k_max + 1), criterion, NmfParams(seed=seed), keep_models=True)
    return np.asarray(rep.models[rep.chosen_k].labels)


def _three_way(x: CountMatrix, truth, seed: int, criterion: CriterionParams, k_max: int | None = None):
    k_max = k_max or min(x.shape)
    ours = adjusted_rand_index(truth, _ours_labels(x, k_max, seed, criterion))
    pam = adjusted_rand_index(truth, pam_silhouette(x).labels)
    elbow = adjusted_rand_index(truth, elbow_kmeans(x, seed=seed).labels)
    return ours, pam, elbow


def sbm_experiment(n: int, reps: int = 100, seed: int = 0, copies: int = 3,
                   criterion: CriterionParams = DEFAULT_CRITERION, workers: int = 1) -> GraphRow:
    def one(s):
        x, truth = sbm_graphs(default_sbm_specs(n), copies, seed=s)
        return _three_way(x, truth, s, criterion)

    scores = replicate_map(one, reps, seed, workers)
    ours, pam, elbow = np.mean(scores, axis=0)
    return GraphRow(f"sbm n={n}", float(ours), float(pam), float(elbow), reps)


def poisson_block_data(rho: float, c: int, seed: int, block_size: int = 20) -> CountMatrix:
    """Two block-Poisson graphs contracted to ``c`` vertices each, as a ``c*c x 2`` matrix."""
    graphs = block_poisson_graphs(default_block_specs(rho, block_size), seed)
    groups = block_groups(graphs[0].shape[0], c)
    return vectorize_graphs([aggregate_graph(g, groups) for g in graphs], "full")


def poisson_experiment(rho: float, c: int, reps: int = 100, seed: int = 0,
                       criterion: CriterionParams = DEFAULT_CRITERION, workers: int = 1) -> GraphRow:
    truth = np.array([0, 1])

    def one(s):
        raw = poisson_block_data(rho, c, s)
        # an all-zero graph has no multinomial reading; skip the replicate
        if np.any(raw.trial_counts == 0):
            return None
        return _three_way(raw, truth, s, criterion, k_max=2)

    scores = [v for v in replicate_map(one, reps, seed, workers) if v is not None]
    ours, pam, elbow = np.mean(scores, axis=0) if scores else (math.nan,) * 3
    return GraphRow(f"poisson rho={rho} c={c}", float(ours), float(pam), float(elbow), len(scores))


# --- limit checks ------------------------------------------------------------------


def bias_check_prototypes() -> np.ndarray:
    """Two 6-dimensional prototypes with one zero entry each."""
    q1 = np.array([0.25, 0.2, 0.2, 0.2, 0.15, 0.0])
    q2 = np.array([0.0, 0.15, 0.2, 0.2, 0.2, 0.25])
    return np.column_stack([q1, q2])


@dataclass(frozen=True)
class BiasRow:
    ell: int
    estimate: float
    std_error: float
    limit: float
    infinite_draws: int


def bias_constant_check(ells=(100, 1000, 10000), reps: int = 4000, seed: int = 0,
                   prototypes: np.ndarray | None = None, lambdas=(1.0, 1.0)) -> list[BiasRow]:
    """Monte Carlo of ``ell * (E[phi(P_hat)] - phi(P*))`` with one observation per cluster."""
    q = bias_check_prototypes() if prototypes is None else np.asarray(prototypes, dtype=float)
    K = q.shape[1]
    labels = np.arange(K)
    z = (q > 0).sum(axis=0)
    limit = theorem1_limit_constant(z, np.ones(K), np.asarray(lambdas, dtype=float))
    rows = []
    for j, ell in enumerate(ells):
        rng = np.random.default_rng(seed + j)
        n = np.array([int(round(lam * ell)) for lam in lambdas])
        ex = q * n
        phi_star = weighted_discrepancy_phi(q, ex, n, labels, K)
        draws = np.stack([rng.multinomial(n[k], q[:, k], size=reps) for k in range(K)], axis=2)
        p_hat = draws / n[None, None, :]
        with np.errstate(divide="ignore"):
            lg = np.where(ex[None] > 0, np.log(np.where(ex[None] > 0, p_hat, 1.0)), 0.0)
        phi = -(ex[None] * lg / n[None, None, :]).sum(axis=(1, 2))
        finite = np.isfinite(phi)
        vals = ell * (phi[finite] - phi_star)
        rows.append(BiasRow(int(ell), float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))),
                          limit, int((~finite).sum())))
    return rows


@dataclass(frozen=True)
class TruncationRow:
    d: int
    T: int
    cap: float
    mse: float
    mse_untruncated: float


def block_mean(d: int, T: int, levels=((3.0, 0.5), (1.0, 4.0))) -> np.ndarray:
    """Rank-2 checkerboard of Poisson means: two row groups by two column groups."""
    lv = np.asarray(levels, dtype=float)
    rows = np.arange(d) >= d // 2
    cols = np.arange(T) >= T // 2
    return lv[np.ix_(rows.astype(int), cols.astype(int))]


def default_cap(d: int, T: int, mean: np.ndarray) -> float:
    """Slowly growing truncation level."""
    return float(math.ceil(mean.max() + 2.0 * math.log(min(d, T))))


def truncation_mse_check(grid=((20, 10), (40, 20), (80, 40), (160, 80), (320, 160)), reps: int = 20,
                   seed: int = 0, rank: int = 2, cap: str | float = "grow") -> list[TruncationRow]:
    """MSE of the truncated rank-``rank`` projection against ``E[X]`` over a growing grid.

    ``cap="grow"`` uses :func:`default_cap`; ``cap="max"`` truncates at the
    observed maximum (a no-op); a number is used as is.
    """
    rows = []
    for j, (d, T) in enumerate(grid):
        mean = block_mean(d, T)
        rng = np.random.default_rng(seed + j)
        mses, raw = [], []
        caps = []
        for _ in range(reps):
            x = rng.poisson(mean)
            c = default_cap(d, T, mean) if cap == "grow" else (float(x.max()) if cap == "max" else float(cap))
            c = max(c, 1e-9)
            caps.append(c)
            mses.append(projection_mse(truncated_projection(x, TruncationParams(c, rank)), mean))
            raw.append(projection_mse(reduced_rank_projection(x.astype(float), rank), mean))
        rows.append(TruncationRow(d, T, float(np.mean(caps)), float(np.mean(mses)), float(np.mean(raw))))
    return rows


# --- merge / split constructions ----------------------------------------------------


def random_planted_model(rng: np.random.Generator, d: int, K: int, per_cluster: int,
                         zeros_per_proto: int = 0) -> ClusterModel:
    protos = rng.dirichlet(np.ones(d), size=K).T
    for k in range(K):
        if zeros_per_proto:
            protos[rng.choice(d, zeros_per_proto, replace=False), k] = 0.0
    protos /= protos.sum(axis=0)
    labels = np.repeat(np.arange(K), per_cluster)
    return ClusterModel(labels, protos)


@dataclass(frozen=True)
class SplitOutcome:
    delta_gap: float
    penalty_gap: float
    discrepancy_gap: float


def split_check(reps: int = 100, seed: int = 0) -> list[SplitOutcome]:
    """Duplicate the last cluster's prototype and move part of it; compare scores."""
    out = []
    for r in range(reps):
        rng = np.random.default_rng(seed + r)
        d = int(rng.integers(3, 12))
        K = int(rng.integers(1, 4))
        per = int(rng.integers(2, 5))
        truth = random_planted_model(rng, d, K, per, zeros_per_proto=int(rng.integers(0, d - 2)))
        n = rng.integers(50, 2000, size=truth.T)
        x = planted_multinomial(truth, n, seed=seed + r)
        params = CriterionParams(s=0.5, gamma=math.log(x.n_total))
        members = np.flatnonzero(truth.labels == truth.K - 1)
        moved = rng.choice(members, int(rng.integers(1, len(members))), replace=False)
        split = split_last(truth, moved)
        dd = discrepancy(x, split) - discrepancy(x, truth)
        out.append(SplitOutcome(delta(x, split, params) - delta(x, truth, params),
                                _penalty_gap(x, split, truth, params), dd))
    return out


def _penalty_gap(x, a, b, params):
    from .selection import penalty

    return penalty(a, x, params) - penalty(b, x, params)


def separated_prototypes(d: int = 12, K: int = 2) -> np.ndarray:
    """Prototypes on disjoint blocks of coordinates, uniform within each block."""
    protos = np.zeros((d, K))
    for k, block in enumerate(np.array_split(np.arange(d), K)):
        protos[block, k] = 1.0 / len(block)
    return protos


def merge_check(n_list=(100, 1000, 10000), reps: int = 100, seed: int = 0, per_cluster: int = 2,
                prototypes: np.ndarray | None = None) -> list[tuple[int, float]]:
    """Fraction of replicates where the merged model scores worse than the truth."""
    q = separated_prototypes() if prototypes is None else prototypes
    K = q.shape[1]
    truth = ClusterModel(np.repeat(np.arange(K), per_cluster), q)
    rows = []
    for n in n_list:
        wins = 0
        for r in range(reps):
            x = planted_multinomial(truth, n, seed=seed + r)
            params = CriterionParams(s=0.5, gamma=math.log(x.n_total))
            merged = merge_last_two(truth, x)
            wins += delta(x, merged, params) > delta(x, truth, params)
        rows.append((int(n), wins / reps))
    return rows


def count_csv_from_graphs(graphs, mode: str = "upper") -> CountMatrix:
    return validate_count_matrix(vectorize_graphs(graphs, mode).entries)
