"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a one-line verdict; ``conftest.py`` prints them in the
terminal summary. Run standalone with ``python -m tests.test_acceptance``.
"""
from __future__ import annotations

import itertools
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from mnclust import experiments as ex
from mnclust.core import CriterionParams, ClusterModel, validate_count_matrix
from mnclust.datagen import swimmer_matrix
from mnclust.factorize import NmfParams, preliminary_estimate
from mnclust.mlqe import SearchParams, closed_form_prototypes, lq_objective, profile_objective_from_labels, refine_labels
from mnclust.selection import penalty, sweep

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(RESULTS[n])


def test_01_sparse_success_counts():
    t0 = time.perf_counter()
    rows = ex.sparse_success_table([25, 50, 100], reps=100, seed=0)
    secs = time.perf_counter() - t0
    floors = {25: 50, 50: 95, 100: 95}
    ok = all(r.delta_successes >= floors[r.d] and r.delta_successes > r.aic_successes for r in rows)
    ok = ok and secs <= 300
    detail = ", ".join(f"d={r.d}: delta {r.delta_successes} vs AIC {r.aic_successes}" for r in rows)
    record(1, ok, f"{detail} ({secs:.0f}s)")
    assert ok


def test_02_swimmer():
    t0 = time.perf_counter()
    rep = sweep(swimmer_matrix(), range(1, 21), CriterionParams(), model="factor")
    secs = time.perf_counter() - t0
    ok = rep.chosen_k == 16 and secs <= 600
    record(2, ok, f"chosen K = {rep.chosen_k}, delta(16) = {rep.record(16).delta:.2f} ({secs:.0f}s)")
    assert ok


def test_03_information_criterion_identities():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 15))
        K = int(rng.integers(1, 10))
        n0 = int(rng.integers(5, 1000))
        x = validate_count_matrix(np.column_stack([rng.multinomial(n0, np.full(d, 1 / d)) for _ in range(K)]))
        model = ClusterModel(np.arange(K), rng.dirichlet(np.ones(d), size=K).T)
        n = x.n_total
        aic = n0 * penalty(model, x, CriterionParams(s=1.0, gamma=1.0))
        bic = n0 * penalty(model, x, CriterionParams(s=0.5, gamma=math.log(n) / math.sqrt(n0)))
        worst = max(worst, abs(aic / ((d - 1) * K) - 1), abs(bic / ((d - 1) * K * math.log(n)) - 1))
    ok = worst < 1e-12
    record(3, ok, f"50 configurations, max relative error {worst:.1e}")
    assert ok


def _brute_force(x, q):
    best = -np.inf
    for labels in itertools.product(range(2), repeat=x.T):
        if 0 < sum(labels) < x.T:
            best = max(best, profile_objective_from_labels(x, labels, 2, q))
    return best


def _mlqe_instances(planted: bool, seed: int = 1000):
    for r in range(50):
        rng = np.random.default_rng(seed + r)
        d = int(rng.integers(2, 5))
        T = int(rng.integers(3, 9))
        if planted:
            protos = rng.dirichlet(np.ones(d), 2).T
            labels = np.r_[0, 1, rng.integers(0, 2, T - 2)]
            a = np.column_stack([rng.multinomial(int(rng.integers(5, 60)), protos[:, k]) for k in labels])
        else:
            a = rng.poisson(5, (d, T))
        a[0, a.sum(axis=0) == 0] = 1
        yield r, validate_count_matrix(a)


def _mlqe_hits(planted: bool, q: float) -> tuple[int, list[int]]:
    hits, stalls = 0, []
    for r, x in _mlqe_instances(planted):
        init = preliminary_estimate(x, 2, NmfParams(seed=r))
        out = refine_labels(x, init, SearchParams(q=q, seed=r))
        got = profile_objective_from_labels(x, out.labels, 2, q)
        if math.isclose(got, _brute_force(x, q), rel_tol=1e-10):
            hits += 1
        else:
            stalls.append(r)
    return hits, stalls


def test_04_mlqe_brute_force():
    parts, ok = [], True
    for q in (0.5, 1.0):
        hits, stalls = _mlqe_hits(True, q)
        ok = ok and hits >= 45
        parts.append(f"q={q}: {hits}/50 (stalls at {stalls or 'none'})")
    # reported, not asserted: structureless Poisson noise
    extra = [f"q={q}: {_mlqe_hits(False, q)[0]}/50" for q in (0.5, 1.0)]
    record(4, ok, "planted " + "; ".join(parts) + " | unstructured " + ", ".join(extra))
    assert ok


def test_05_closed_form_optimality():
    rng = np.random.default_rng(5)
    cand = rng.dirichlet(np.ones(3), size=10_000)
    failures = 0
    for q in (0.3, 0.5, 0.9, 1.0):
        for _ in range(100):
            m = rng.integers(0, 50, 3).astype(float)
            m[0] += 1
            best = lq_objective(m[:, None], closed_form_prototypes(m[:, None], q), q)
            if q == 1.0:
                with np.errstate(divide="ignore", invalid="ignore"):
                    vals = np.where(m > 0, m * np.log(cand), 0.0).sum(axis=1)
            else:
                vals = (m * (cand ** (1 - q) - 1)).sum(axis=1) / (1 - q)
            failures += int(np.any(vals > best + 1e-9 * (1 + abs(best))))
    ok = failures == 0
    record(5, ok, f"400 columns x 10^4 candidates, {failures} columns beaten")
    assert ok


def test_06_bias_constant():
    t0 = time.perf_counter()
    rows = ex.bias_constant_check(ells=(100, 1000, 10_000), reps=4000, seed=0)
    secs = time.perf_counter() - t0
    last = rows[-1]
    rel = abs(last.estimate - last.limit) / last.limit
    ok = rel <= 0.10 and secs <= 120
    trail = ", ".join(f"l={r.ell}: {r.estimate:.3f}" for r in rows)
    record(6, ok, f"{trail}; limit {last.limit:.3f}, rel err {rel:.3f} ({secs:.0f}s)")
    assert ok


def test_07_split_direction():
    out = ex.split_check(reps=100, seed=0)
    min_gap = min(o.delta_gap for o in out)
    max_disc = max(abs(o.discrepancy_gap) for o in out)
    ok = min_gap > 0 and max_disc < 1e-12
    record(7, ok, f"100 instances, min delta gap {min_gap:.3g}, max discrepancy change {max_disc:.1e}")
    assert ok


def test_08_merge_direction():
    rows = ex.merge_check(n_list=(100, 1000, 10_000), reps=100, seed=0)
    fracs = [f for _, f in rows]
    ok = all(b >= a for a, b in zip(fracs, fracs[1:])) and fracs[-1] >= 0.99
    record(8, ok, ", ".join(f"N={n}: {f:.2f}" for n, f in rows))
    assert ok


def test_09_sbm():
    t0 = time.perf_counter()
    rows = [ex.sbm_experiment(n, reps=100, seed=0) for n in (40, 100)]
    secs = time.perf_counter() - t0
    ok = rows[0].ours >= 0.3 and rows[1].ours >= 0.8 and secs <= 600
    detail = ", ".join(f"{r.setting}: ours {r.ours:.2f} / pam {r.pam:.2f} / elbow {r.elbow:.2f}" for r in rows)
    record(9, ok, f"{detail} ({secs:.0f}s)")
    assert ok


PROPERTY_SUITES = ["test_lowrank.py", "test_factorize.py", "test_metrics.py", "test_selection.py",
                   "test_mlqe.py", "test_datagen.py"]


def test_10_property_suites():
    here = Path(__file__).parent
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *[str(here / f) for f in PROPERTY_SUITES]],
                          capture_output=True, text=True, cwd=here.parent)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0
    record(10, ok, f"property suites: {summary}")
    assert ok, proc.stdout[-2000:]


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
