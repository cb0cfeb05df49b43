"""Seeded generators for the synthetic experiments.

Every generator is a pure function of its arguments and ``seed``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ClusterModel, CountMatrix, MnclustError, validate_count_matrix


class DTooSmall(MnclustError):
    pass


class InvalidPartition(MnclustError):
    pass


class ShapeMismatch(MnclustError):
    pass


# 5 x 5 rate matrices for the two block-Poisson graphs
B1 = np.array(
    [
        [0.1, 0.045, 0.015, 0.19, 0.001],
        [0.045, 0.05, 0.035, 0.14, 0.03],
        [0.015, 0.035, 0.08, 0.105, 0.04],
        [0.19, 0.14, 0.105, 0.29, 0.13],
        [0.001, 0.03, 0.04, 0.13, 0.09],
    ]
)
B2 = np.array(
    [
        [0.19, 0.14, 0.29, 0.105, 0.13],
        [0.001, 0.03, 0.13, 0.04, 0.09],
        [0.015, 0.035, 0.105, 0.08, 0.04],
        [0.045, 0.05, 0.14, 0.035, 0.03],
        [0.1, 0.045, 0.19, 0.015, 0.001],
    ]
)


@dataclass(frozen=True)
class BlockGraphSpec:
    block_matrix: np.ndarray
    block_size: int = 20
    intensity: float = 1.0
    scale: float = 100.0

    def __post_init__(self):
        b = np.asarray(self.block_matrix, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ShapeMismatch("block matrix must be square")
        if np.any(b < 0):
            raise MnclustError("rates must be non-negative")
        if not 0 <= self.intensity <= 1:
            raise MnclustError("intensity must lie in [0, 1]")
        if self.block_size < 1:
            raise MnclustError("block_size must be >= 1")
        object.__setattr__(self, "block_matrix", b)

    @property
    def n(self) -> int:
        return self.block_matrix.shape[0] * self.block_size

    def mean_matrix(self) -> np.ndarray:
        m = self.scale * self.intensity * self.block_matrix
        return np.kron(m, np.ones((self.block_size, self.block_size)))


@dataclass(frozen=True)
class SbmSpec:
    block_probabilities: np.ndarray
    block_sizes: tuple

    def __post_init__(self):
        b = np.asarray(self.block_probabilities, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] != len(self.block_sizes):
            raise ShapeMismatch("block matrix must be square with one size per block")
        if not np.allclose(b, b.T):
            raise MnclustError("block matrix must be symmetric")
        if np.any(b < 0) or np.any(b > 1):
            raise MnclustError("block probabilities must lie in [0, 1]")
        object.__setattr__(self, "block_probabilities", b)
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    def edge_probabilities(self) -> np.ndarray:
        idx = np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)
        return self.block_probabilities[np.ix_(idx, idx)]


def default_sbm_specs(n: int = 100) -> list[SbmSpec]:
    """Four equal 0.75/0.25 blocks versus three (1/4, 1/2, 1/4) 0.6/0.4 blocks, scaled to ``n``."""
    q = n // 4
    four = (q, q, q, n - 3 * q)
    three = (q, n - 2 * q, q)
    b4 = np.full((4, 4), 0.25) + 0.5 * np.eye(4)
    b3 = np.full((3, 3), 0.4) + 0.2 * np.eye(3)
    return [SbmSpec(b4, four), SbmSpec(b3, three)]


def sparse_prototypes(d: int, n_tens: int = 10) -> np.ndarray:
    """Two mirrored prototypes: ones, a shared band of tens, zeros (and the reverse)."""
    if d < 2 * n_tens:
        raise DTooSmall(f"d={d} too small for a band of {n_tens} tens")
    rest = d - n_tens
    ones = rest - rest // 2
    zeros = rest // 2
    band = np.full(n_tens, 10.0)
    v1 = np.concatenate([np.ones(ones), band, np.zeros(zeros)])
    v2 = np.concatenate([np.zeros(ones), band, np.ones(zeros)])
    p = np.column_stack([v1, v2])
    return p / p.sum(axis=0)


def planted_multinomial(model: ClusterModel, trial_counts, seed: int) -> CountMatrix:
    """One multinomial column per label, drawn from that label's prototype."""
    n = np.broadcast_to(np.asarray(trial_counts, dtype=np.int64), (model.T,))
    if np.any(n <= 0):
        raise MnclustError("trial counts must be positive")
    rng = np.random.default_rng(seed)
    cols = [rng.multinomial(int(n[t]), model.prototypes[:, model.labels[t]]) for t in range(model.T)]
    return CountMatrix(np.column_stack(cols), n)


def two_cluster_sparse(d: int, n_trials: int = 200, seed: int = 0, n_tens: int = 10):
    """A d x 2 matrix, one draw from each of the two mirrored sparse prototypes."""
    if d < 20:
        raise DTooSmall("d must be at least 20")
    truth = ClusterModel(np.array([0, 1]), sparse_prototypes(d, n_tens))
    return planted_multinomial(truth, n_trials, seed), truth


def block_poisson_graphs(spec: BlockGraphSpec | list, seed: int) -> list[np.ndarray]:
    """Independent Poisson graphs, one per spec (defaults to the two 5 x 5 rate matrices)."""
    specs = spec if isinstance(spec, (list, tuple)) else [spec]
    rng = np.random.default_rng(seed)
    return [rng.poisson(s.mean_matrix()).astype(np.int64) for s in specs]


def default_block_specs(intensity: float, block_size: int = 20) -> list[BlockGraphSpec]:
    return [BlockGraphSpec(B1, block_size, intensity), BlockGraphSpec(B2, block_size, intensity)]


def block_groups(n: int, c: int) -> list[np.ndarray]:
    """Split ``0..n-1`` into ``c`` contiguous equal groups."""
    if c < 1 or n % c:
        raise InvalidPartition(f"cannot split {n} vertices into {c} equal groups")
    return [np.arange(g * (n // c), (g + 1) * (n // c)) for g in range(c)]


def aggregate_graph(g, groups) -> np.ndarray:
    """Sum edge weights over every (group u, group v) sub-block."""
    g = np.asarray(g)
    n = g.shape[0]
    if g.ndim != 2 or g.shape[1] != n:
        raise ShapeMismatch("graph must be square")
    flat = np.concatenate([np.asarray(grp, dtype=np.int64) for grp in groups]) if groups else np.array([])
    if len(flat) != n or not np.array_equal(np.sort(flat), np.arange(n)):
        raise InvalidPartition("groups must partition the vertex set")
    member = np.empty(n, dtype=np.int64)
    for u, grp in enumerate(groups):
        member[np.asarray(grp, dtype=np.int64)] = u
    c = len(groups)
    ind = np.zeros((n, c), dtype=g.dtype)
    ind[np.arange(n), member] = 1
    return ind.T @ g @ ind


def vectorize_graphs(graphs, mode: str = "full") -> CountMatrix:
    """Stack graphs as columns: all ``c*c`` entries, or the strict upper triangle."""
    graphs = [np.asarray(g) for g in graphs]
    if not graphs:
        raise ShapeMismatch("no graphs")
    c = graphs[0].shape[0]
    if any(g.shape != (c, c) for g in graphs):
        raise ShapeMismatch("graphs must share one square shape")
    if mode == "full":
        cols = [g.reshape(-1) for g in graphs]
    elif mode == "upper":
        iu = np.triu_indices(c, k=1)
        cols = [g[iu] for g in graphs]
    else:
        raise MnclustError(f"unknown mode {mode!r}")
    return validate_count_matrix(np.column_stack(cols))


def unvectorize_upper(col, c: int) -> np.ndarray:
    g = np.zeros((c, c), dtype=np.asarray(col).dtype)
    g[np.triu_indices(c, k=1)] = col
    return g


def sbm_graph(spec: SbmSpec, rng: np.random.Generator) -> np.ndarray:
    """Undirected loop-less Bernoulli graph."""
    p = spec.edge_probabilities()
    upper = np.triu(rng.random(p.shape) < p, k=1)
    return (upper | upper.T).astype(np.int64)


def sbm_graphs(specs, copies_per_spec: int = 3, seed: int = 0):
    """``copies_per_spec`` graphs per spec, vectorized (upper mode), with their true labels."""
    if not specs:
        raise MnclustError("need at least one spec")
    rng = np.random.default_rng(seed)
    graphs, labels = [], []
    for k, spec in enumerate(specs):
        for _ in range(copies_per_spec):
            graphs.append(sbm_graph(spec, rng))
            labels.append(k)
    return vectorize_graphs(graphs, "upper"), np.array(labels, dtype=np.int64)


# --- Swimmer -----------------------------------------------------------------

SWIMMER_ROWS, SWIMMER_COLS = 20, 11
_TORSO = [(r, c) for r in range(6, 14) for c in range(4, 7)]


def _segment(r0, c0, dr, dc, length=4):
    return [(r0 + j * dr, c0 + j * dc) for j in range(length)]


def _left_limbs():
    arm = [
        _segment(6, 3, 0, -1),  # out
        _segment(5, 3, -1, -1),  # raised diagonal
        _segment(5, 4, -1, 0),  # straight up
        _segment(7, 3, 1, -1),  # lowered diagonal
    ]
    leg = [
        _segment(13, 3, 0, -1),
        _segment(12, 3, -1, -1),
        _segment(14, 3, 1, -1),
        _segment(14, 4, 1, 0),
    ]
    return arm, leg


def _mirror(limb):
    return [[(r, SWIMMER_COLS - 1 - c) for r, c in pos] for pos in limb]


def swimmer_parts() -> tuple[np.ndarray, list[np.ndarray]]:
    """Torso mask and, per limb, a 4 x 220 array of position masks."""
    arm_l, leg_l = _left_limbs()
    limbs = [arm_l, _mirror(arm_l), leg_l, _mirror(leg_l)]

    def mask(pixels):
        m = np.zeros((SWIMMER_ROWS, SWIMMER_COLS), dtype=np.int64)
        for r, c in pixels:
            m[r, c] = 1
        return m.reshape(-1)

    torso = mask(_TORSO)
    return torso, [np.stack([mask(p) for p in limb]) for limb in limbs]


def swimmer_matrix() -> CountMatrix:
    """220 x 256 binary matrix: a fixed torso plus 4 limbs in 4 positions each."""
    torso, limbs = swimmer_parts()
    cols = []
    for pos in itertools.product(range(4), repeat=4):
        img = torso.copy()
        for limb, p in zip(limbs, pos):
            img += limb[p]
        cols.append(img)
    x = np.column_stack(cols)
    if x.max() > 1:
        raise AssertionError("swimmer parts overlap")
    return validate_count_matrix(x)


def swimmer_exact_factors() -> tuple[np.ndarray, np.ndarray]:
    """A 16-term non-negative factorization ``X = W H`` (torso shared evenly by the limbs)."""
    torso, limbs = swimmer_parts()
    w = np.column_stack([limb[p] + torso / 4 for limb in limbs for p in range(4)])
    h = np.zeros((16, 256))
    for t, pos in enumerate(itertools.product(range(4), repeat=4)):
        for li, p in enumerate(pos):
            h[4 * li + p, t] = 1.0
    return w, h


def to_pgm(column, rows: int = SWIMMER_ROWS, cols: int = SWIMMER_COLS) -> bytes:
    """Plain (P2) PGM for one vectorized image."""
    img = np.asarray(column).reshape(rows, cols)
    top = max(int(img.max()), 1)
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
    return f"P2\n{cols} {rows}\n{top}\n{body}\n".encode()
