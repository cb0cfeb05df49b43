"""Discrepancy-plus-penalty model selection over the number of clusters."""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClusterModel,
    Factorization,
    CountMatrix,
    CriterionParams,
    DimensionMismatch,
    EmptyCluster,
    MnclustError,
    RankOutOfRange,
    empirical_probabilities,
)
from .factorize import NmfParams, nmf as run_nmf, preliminary_estimate, smoothed_probabilities
from .lowrank import normalize_columns
from .mlqe import SearchParams, cluster_counts, closed_form_prototypes, refine_labels

log = logging.getLogger(__name__)

LOG_GUARD = 1e-300


class KTooSmall(MnclustError):
    pass


class InvalidSplit(MnclustError):
    pass


@dataclass(frozen=True)
class KRecord:
    k: int
    discrepancy: float
    penalty: float
    delta: float
    z_counts: tuple
    n_counts: tuple
    converged: bool = True
    support_violation: bool = False


@dataclass(frozen=True)
class SelectionReport:
    per_k: tuple
    chosen_k: int
    models: dict = field(default_factory=dict, compare=False, repr=False)

    def record(self, k: int) -> KRecord:
        for r in self.per_k:
            if r.k == k:
                return r
        raise KeyError(k)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,discrepancy,penalty,delta,chosen,converged,support_violation\n")
        for r in self.per_k:
            buf.write(
                f"{r.k},{r.discrepancy:.10g},{r.penalty:.10g},{r.delta:.10g},"
                f"{int(r.k == self.chosen_k)},{int(r.converged)},{int(r.support_violation)}\n"
            )
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"{'K':>4} {'D':>14} {'penalty':>12} {'Delta':>14}"]
        for r in self.per_k:
            mark = " *" if r.k == self.chosen_k else ""
            lines.append(f"{r.k:>4} {r.discrepancy:>14.4f} {r.penalty:>12.4f} {r.delta:>14.4f}{mark}")
        lines.append(f"chosen K = {self.chosen_k}")
        return "\n".join(lines) + "\n"


def _check_model(x: CountMatrix, model: ClusterModel) -> None:
    if model.T != x.T or model.d != x.d:
        raise DimensionMismatch(
            f"model is {model.d}x{model.T} (d x T) but data is {x.d}x{x.T}"
        )


def discrepancy_terms(x: CountMatrix, model: ClusterModel) -> tuple[np.ndarray, bool]:
    """Per-column ``-sum_i P~_it log Q_i,label(t)`` and whether any support was violated."""
    _check_model(x, model)
    p = empirical_probabilities(x)
    q = model.prototypes[:, model.labels]
    pos = p > 0
    violated = bool(np.any(pos & (q < LOG_GUARD)))
    lg = np.log(np.maximum(q, LOG_GUARD))
    terms = -np.where(pos, p * lg, 0.0).sum(axis=0)
    return terms, violated


def discrepancy(x: CountMatrix, model: ClusterModel) -> float:
    return float(discrepancy_terms(x, model)[0].sum())


def nonzero_counts(prototypes, zero_threshold: float) -> np.ndarray:
    """Entries above ``zero_threshold`` times the column maximum."""
    q = np.asarray(prototypes, dtype=float)
    return (q > zero_threshold * q.max(axis=0)).sum(axis=0)


def cluster_trials(x: CountMatrix, model: ClusterModel) -> np.ndarray:
    return np.bincount(model.labels, weights=x.trial_counts, minlength=model.K)


def penalty(model: ClusterModel, x: CountMatrix, params: CriterionParams = CriterionParams()) -> float:
    """``gamma * sum_k (Z_k - 1) / N_k**s`` with ``Z_k`` the non-zero prototype entries."""
    _check_model(x, model)
    n = cluster_trials(x, model)
    empty = np.flatnonzero(n == 0)
    if len(empty):
        raise EmptyCluster(int(empty[0]))
    z = nonzero_counts(model.prototypes, params.zero_threshold)
    return float(params.gamma * np.sum((z - 1) / n**params.s))


def conventional_penalty(kind: str, k: int, d: int, n_total: float | None = None) -> float:
    """Parameter-count penalties: ``(d-1)K`` (AIC) or ``(d-1)K log N`` (BIC)."""
    if k < 1 or d < 2:
        raise MnclustError("need k >= 1 and d >= 2")
    kind = kind.upper()
    if kind == "AIC":
        return float((d - 1) * k)
    if kind == "BIC":
        if n_total is None or n_total <= 0:
            raise MnclustError("BIC needs a positive total trial count")
        return float((d - 1) * k * math.log(n_total))
    raise MnclustError(f"unknown penalty kind {kind!r}")


def delta(x: CountMatrix, model: ClusterModel, params: CriterionParams = CriterionParams()) -> float:
    """Discrepancy plus penalty; ``inf`` when some cluster is empty."""
    try:
        pen = penalty(model, x, params)
    except EmptyCluster:
        return math.inf
    return discrepancy(x, model) + pen


def conventional_delta(x: CountMatrix, model: ClusterModel, kind: str = "AIC") -> float:
    """Discrepancy plus the AIC/BIC penalty rescaled by the mean trial count ``N/T``.

    This is the classic criterion divided by ``N_0``, which puts it on the same
    per-trial scale as :func:`delta`.
    """
    if not model.is_surjective():
        return math.inf
    n0 = x.n_total / x.T
    return discrepancy(x, model) + conventional_penalty(kind, model.K, x.d, x.n_total) / n0


def evaluate(x: CountMatrix, model: ClusterModel, params: CriterionParams, kind: str = "delta") -> KRecord:
    terms, violated = discrepancy_terms(x, model)
    disc = float(terms.sum())
    n = cluster_trials(x, model)
    z = nonzero_counts(model.prototypes, params.zero_threshold)
    if np.any(n == 0):
        pen = math.inf
    elif kind == "delta":
        pen = float(params.gamma * np.sum((z - 1) / n**params.s))
    else:
        pen = conventional_penalty(kind, model.K, x.d, x.n_total) / (x.n_total / x.T)
    return KRecord(
        k=model.K,
        discrepancy=disc,
        penalty=pen,
        delta=disc + pen,
        z_counts=tuple(int(v) for v in z),
        n_counts=tuple(int(v) for v in n),
        converged=bool(model.converged),
        support_violation=violated,
    )


def evaluate_factorization(x: CountMatrix, f: Factorization, params: CriterionParams) -> KRecord:
    """Score a factorization directly: column ``t`` is fitted by ``(W H)_t``.

    Cluster masses use the column-normalized weights, ``N_k = sum_t N_t H_kt``.
    When ``H`` is a 0/1 indicator matrix this is exactly :func:`evaluate` on the
    model with prototypes ``W`` and labels ``argmax_k H``.
    """
    if f.basis.shape[0] != x.d or f.weights.shape[1] != x.T:
        raise DimensionMismatch("factorization does not match the data")
    p = empirical_probabilities(x)
    fitted = normalize_columns(f.product())
    pos = p > 0
    violated = bool(np.any(pos & (fitted < LOG_GUARD)))
    disc = float(-np.where(pos, p * np.log(np.maximum(fitted, LOG_GUARD)), 0.0).sum())
    w = f.basis / f.basis.sum(axis=0)
    hn = normalize_columns(f.weights)
    n = hn @ x.trial_counts
    z = nonzero_counts(w, params.zero_threshold)
    live = n > 0
    pen = float(params.gamma * np.sum((z[live] - 1) / n[live] ** params.s))
    if not np.all(live):
        pen = math.inf
    return KRecord(
        k=f.K,
        discrepancy=disc,
        penalty=pen,
        delta=disc + pen,
        z_counts=tuple(int(v) for v in z),
        n_counts=tuple(float(v) for v in n),
        converged=bool(f.converged),
        support_violation=violated,
    )


def choose_k(records, near_tie_rel: float) -> int:
    """Smallest ``k`` whose score is within ``near_tie_rel`` (relative) of the best."""
    finite = [r for r in records if math.isfinite(r.delta)]
    if not finite:
        return min(r.k for r in records)
    best = min(r.delta for r in finite)
    bound = best + near_tie_rel * abs(best)
    return min(r.k for r in finite if r.delta <= bound)


def fit_k(
    x: CountMatrix,
    k: int,
    nmf: NmfParams = NmfParams(),
    search: SearchParams = SearchParams(),
    refine: bool = True,
) -> ClusterModel:
    model = preliminary_estimate(x, k, nmf)
    if refine:
        refined = refine_labels(x, model, search)
        model = ClusterModel(refined.labels, refined.prototypes, converged=model.converged and refined.converged)
    return model


def sweep(
    x: CountMatrix,
    k_range,
    criterion: CriterionParams = CriterionParams(),
    nmf: NmfParams = NmfParams(),
    search: SearchParams | None = None,
    refine: bool = True,
    kind: str = "delta",
    keep_models: bool = False,
    model: str = "cluster",
) -> SelectionReport:
    """Fit every ``k`` in ``k_range`` and pick the smallest near-minimizer of the score.

    ``kind`` is ``"delta"`` for the zero-aware penalty or ``"AIC"``/``"BIC"``
    for the conventional ones (rescaled as in :func:`conventional_delta`).

    ``model="cluster"`` scores hard clusterings (preliminary estimate, then
    label refinement). ``model="factor"`` scores the rank-``k`` non-negative
    factorization itself (see :func:`evaluate_factorization`), which is the
    form to use when estimating an inner dimension rather than a number of
    clusters.
    """
    if model not in ("cluster", "factor"):
        raise MnclustError(f"unknown model form {model!r}")
    if model == "factor" and kind != "delta":
        raise MnclustError("factor form supports only the zero-aware penalty")
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1 or ks[-1] > min(x.shape):
        raise RankOutOfRange(f"k range must lie within 1..{min(x.shape)}")
    if search is None:
        search = SearchParams(q=criterion.q, seed=nmf.seed)
    records = []
    models = {}
    for k in ks:
        if model == "factor":
            fitted = run_nmf(smoothed_probabilities(x, k), k, nmf)
            rec = evaluate_factorization(x, fitted, criterion)
        else:
            fitted = fit_k(x, k, nmf, search, refine)
            rec = evaluate(x, fitted, criterion, kind)
        log.debug("k=%d D=%.6g pen=%.6g delta=%.6g", k, rec.discrepancy, rec.penalty, rec.delta)
        records.append(rec)
        if keep_models:
            models[k] = fitted
    return SelectionReport(tuple(records), choose_k(records, criterion.near_tie_rel), models)


def merge_last_two(truth: ClusterModel, x: CountMatrix) -> ClusterModel:
    """Fuse the last two clusters; the merged prototype is their pooled empirical frequency."""
    if truth.K < 2:
        raise KTooSmall("merging needs at least two clusters")
    _check_model(x, truth)
    K = truth.K
    labels = np.where(truth.labels == K - 1, K - 2, truth.labels)
    pooled = x.entries[:, labels == K - 2].sum(axis=1).astype(float)
    if pooled.sum() <= 0:
        raise EmptyCluster(K - 2)
    protos = np.column_stack([truth.prototypes[:, : K - 2], pooled / pooled.sum()])
    return ClusterModel(labels, protos)


def split_last(truth: ClusterModel, split_assignment) -> ClusterModel:
    """Move ``split_assignment`` (members of the last cluster) into a new cluster with the same prototype."""
    K = truth.K
    members = set(np.flatnonzero(truth.labels == K - 1).tolist())
    chosen = set(int(t) for t in split_assignment)
    if not chosen or not chosen < members:
        raise InvalidSplit("split must be a proper non-empty subset of the last cluster")
    labels = np.array(truth.labels)
    labels[sorted(chosen)] = K
    protos = np.column_stack([truth.prototypes, truth.prototypes[:, K - 1]])
    return ClusterModel(labels, protos)


def empirical_model(x: CountMatrix, labels, k: int, q: float = 1.0) -> ClusterModel:
    """Closed-form prototypes for a fixed, surjective labeling."""
    return ClusterModel(labels, closed_form_prototypes(cluster_counts(x, labels, k), q))
