"""Domain types shared by every stage of the pipeline.

Labels are 0-based throughout (``0 .. K-1``); the CLI keeps that convention
in its CSV output.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

PROB_ATOL = 1e-9


class MnclustError(ValueError):
    """Base class for input and contract violations."""


class NegativeEntry(MnclustError):
    def __init__(self, i: int, t: int):
        super().__init__(f"negative count at row {i}, column {t}")
        self.i, self.t = i, t


class ZeroColumn(MnclustError):
    def __init__(self, t: int):
        super().__init__(f"column {t} has zero total count")
        self.t = t


class DimensionMismatch(MnclustError):
    pass


class RankOutOfRange(MnclustError):
    pass


class EmptyCluster(MnclustError):
    def __init__(self, k: int):
        super().__init__(f"cluster {k} is empty")
        self.k = k


class LengthMismatch(MnclustError):
    pass


class CsvParseError(MnclustError):
    def __init__(self, line: int, column: int, msg: str):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line, self.column = line, column


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CountMatrix:
    """A d x T matrix of multinomial counts; column ``t`` holds ``N_t`` trials."""

    entries: np.ndarray
    trial_counts: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries)
        n = np.asarray(self.trial_counts)
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise DimensionMismatch(f"expected a non-empty 2-d matrix, got shape {e.shape}")
        if n.shape != (e.shape[1],):
            raise DimensionMismatch("trial_counts must have one entry per column")
        if not np.array_equal(e.sum(axis=0), n):
            raise MnclustError("column sums must equal trial_counts")
        object.__setattr__(self, "entries", _frozen(e.astype(np.int64)))
        object.__setattr__(self, "trial_counts", _frozen(n.astype(np.int64)))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> int:
        return self.entries.shape[1]

    @property
    def n_total(self) -> int:
        return int(self.trial_counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def validate_count_matrix(raw) -> CountMatrix:
    """Check a raw integer matrix and derive the trial counts from its column sums."""
    a = np.asarray(raw)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if a.dtype.kind == "f":
        if not np.all(np.isfinite(a)) or not np.all(a == np.round(a)):
            raise MnclustError("counts must be integers")
    elif a.dtype.kind not in "iub":
        raise MnclustError(f"unsupported dtype {a.dtype}")
    a = a.astype(np.int64)
    neg = np.argwhere(a < 0)
    if len(neg):
        i, t = neg[0]
        raise NegativeEntry(int(i), int(t))
    sums = a.sum(axis=0)
    zero = np.flatnonzero(sums == 0)
    if len(zero):
        raise ZeroColumn(int(zero[0]))
    return CountMatrix(a, sums)


def is_probability_matrix(p: np.ndarray, atol: float = PROB_ATOL) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(p.ndim == 2 and np.all(p >= 0) and np.allclose(p.sum(axis=0), 1.0, rtol=0, atol=atol))


def check_probability_matrix(p: np.ndarray, atol: float = PROB_ATOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2:
        raise DimensionMismatch("probability matrix must be 2-d")
    if np.any(p < 0):
        raise MnclustError("probability matrix has negative entries")
    if not np.allclose(p.sum(axis=0), 1.0, rtol=0, atol=atol):
        raise MnclustError("probability matrix columns must sum to 1")
    return p


def empirical_probabilities(x: CountMatrix) -> np.ndarray:
    """Column-normalized counts ``X_t / N_t``."""
    return x.entries / x.trial_counts[None, :].astype(float)


@dataclass(frozen=True)
class ClusterModel:
    """A label map plus one probability vector (prototype) per cluster."""

    labels: np.ndarray
    prototypes: np.ndarray
    converged: bool = field(default=True, compare=False)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionMismatch("labels must be a vector")
        if labels.dtype.kind not in "iu":
            if not np.all(labels == np.round(labels)):
                raise MnclustError("labels must be integers")
        labels = labels.astype(np.int64)
        protos = check_probability_matrix(self.prototypes)
        k = protos.shape[1]
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise MnclustError(f"labels must lie in 0..{k - 1}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "prototypes", _frozen(protos))

    @property
    def K(self) -> int:
        return self.prototypes.shape[1]

    @property
    def d(self) -> int:
        return self.prototypes.shape[0]

    @property
    def T(self) -> int:
        return self.labels.shape[0]

    def is_surjective(self) -> bool:
        return bool(np.all(np.bincount(self.labels, minlength=self.K) > 0))

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)


@dataclass(frozen=True)
class Factorization:
    """Non-negative factors with ``basis @ weights`` approximating a probability matrix."""

    basis: np.ndarray
    weights: np.ndarray
    objective: float = float("nan")
    converged: bool = True
    history: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.basis, dtype=float)
        h = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or h.ndim != 2 or w.shape[1] != h.shape[0]:
            raise DimensionMismatch(f"incompatible factor shapes {w.shape} and {h.shape}")
        if np.any(w < 0) or np.any(h < 0):
            raise MnclustError("factors must be non-negative")
        object.__setattr__(self, "basis", _frozen(w))
        object.__setattr__(self, "weights", _frozen(h))

    @property
    def K(self) -> int:
        return self.basis.shape[1]

    def product(self) -> np.ndarray:
        return self.basis @ self.weights


@dataclass(frozen=True)
class CriterionParams:
    """Penalty exponent ``s``, scale ``gamma``, Lq order ``q`` and selection tolerances."""

    s: float = 1.0
    gamma: float = 1.0
    q: float = 1.0
    zero_threshold: float = 1e-6
    near_tie_rel: float = 1e-3

    def __post_init__(self):
        if not self.s >= 0:
            raise MnclustError("s must be >= 0")
        if not self.gamma > 0:
            raise MnclustError("gamma must be > 0")
        if not 0 < self.q <= 1:
            raise MnclustError("q must lie in (0, 1]")
        if not 0 < self.zero_threshold < 1:
            raise MnclustError("zero_threshold must lie in (0, 1)")
        if not 0 <= self.near_tie_rel <= 0.1:
            raise MnclustError("near_tie_rel must lie in [0, 0.1]")


# --- CSV matrix format -------------------------------------------------------


def parse_count_csv(text: str, header: bool = False) -> CountMatrix:
    """Parse rows-as-dimensions CSV text into a validated :class:`CountMatrix`."""
    rows: list[list[int]] = []
    width = None
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if header and lineno == 1:
            continue
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        vals = []
        for col, cell in enumerate(row, start=1):
            cell = cell.strip()
            try:
                v = int(cell)
            except ValueError:
                try:
                    f = float(cell)
                except ValueError:
                    raise CsvParseError(lineno, col, f"not a number: {cell!r}") from None
                if not np.isfinite(f) or f != int(f):
                    raise CsvParseError(lineno, col, f"not an integer: {cell!r}")
                v = int(f)
            if v < 0:
                raise CsvParseError(lineno, col, f"negative count {v}")
            vals.append(v)
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise CsvParseError(lineno, len(vals), f"expected {width} fields, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise CsvParseError(1, 1, "no data rows")
    return validate_count_matrix(np.array(rows, dtype=np.int64))


def read_count_csv(path, header: bool = False) -> CountMatrix:
    with open(path, newline="") as fh:
        return parse_count_csv(fh.read(), header=header)


def format_count_csv(x: CountMatrix | np.ndarray) -> str:
    a = x.entries if isinstance(x, CountMatrix) else np.asarray(x)
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in a)


def write_count_csv(x: CountMatrix | np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_count_csv(x))


def as_labels(values: Iterable[int]) -> np.ndarray:
    return np.asarray(list(values), dtype=np.int64)
