"""Clustering-based evaluation of CFG comparators.

A comparator fills a pairwise distance matrix, hierarchical agglomerative
clustering (HAC) is cut at a sweep of thresholds, and every cut is scored
against the ground-truth groups with cluster precision and recall.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .baseline import DEFAULT_NODE_BUDGET, mcs_similarity
from .cfg import Cfg
from .features import DEFAULT_N, GraphSignature, extract_features
from .fuzzyhash import FuzzyHash, ProjectionParams, project
from .similarity import EmptySignatureError

COMPARATORS = ("tah", "tah_exact", "mcs")
LINKAGES = ("single", "average", "complete")
DEFAULT_STEP = 0.005

_ALIASES = {"exact": "tah_exact"}


class ComparatorError(RuntimeError):
    def __init__(self, i: int, j: int, cause: Exception):
        self.pair = (i, j)
        self.cause = cause
        super().__init__(f"comparing items {i} and {j}: {cause}")

    def __reduce__(self):
        return (ComparatorError, (self.pair[0], self.pair[1], self.cause))


def canonical_comparator(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in COMPARATORS:
        raise ValueError(f"unknown comparator {name!r}; expected one of {COMPARATORS}")
    return name


@dataclass
class DistanceMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.array_equal(m, m.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(m) != 0.0):
            raise ValueError("distance matrix must have a zero diagonal")
        if m.size and (m.min() < 0.0 or m.max() > 1.0):
            raise ValueError("distances must lie in [0, 1]")
        self.entries = m

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def pair_values(self) -> np.ndarray:
        iu = np.triu_indices(self.size, k=1)
        return self.entries[iu]


def _symmetric(upper: np.ndarray) -> np.ndarray:
    upper = np.triu(upper, k=1)
    return upper + upper.T


def signature_matrix(sigs: Sequence[GraphSignature]) -> tuple[sp.csr_matrix, np.ndarray]:
    vocab: dict[str, int] = {}
    rows, cols, vals = [], [], []
    for r, s in enumerate(sigs):
        for key, c in s.counts.items():
            rows.append(r)
            cols.append(vocab.setdefault(key, len(vocab)))
            vals.append(float(c))
    x = sp.csr_matrix((vals, (rows, cols)), shape=(len(sigs), max(len(vocab), 1)), dtype=np.float64)
    totals = np.array([s.total for s in sigs], dtype=np.float64)
    return x, totals


def _rectification_matrix(totals: np.ndarray) -> np.ndarray:
    a, b = totals[:, None], totals[None, :]
    return np.minimum(a, b) / np.maximum(a, b)


def exact_distance_matrix(sigs: Sequence[GraphSignature]) -> np.ndarray:
    """All-pairs ``1 - exact_similarity`` in one sparse product."""
    x, totals = signature_matrix(sigs)
    dots = (x @ x.T).toarray()
    sq = np.diag(dots).copy()
    sq_a, sq_b = sq[:, None], sq[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(sq_a == sq_b, dots / sq_a, dots / np.sqrt(sq_a * sq_b))
    cos = np.clip(cos, 0.0, 1.0)
    return _symmetric(1.0 - _rectification_matrix(totals) * cos)


def hash_distance_matrix(hashes: Sequence[FuzzyHash]) -> np.ndarray:
    """All-pairs ``1 - hash_similarity`` via bit-agreement counts."""
    k = hashes[0].params.k
    if any(h.params != hashes[0].params for h in hashes):
        raise ValueError("all hashes must share projection parameters")
    bits = np.stack([h.bit_array() for h in hashes]).astype(np.float64)
    agree = bits @ bits.T + (1.0 - bits) @ (1.0 - bits).T
    diff = k - np.rint(agree)
    est = np.clip(2.0 * (1.0 - diff / k) - 1.0, 0.0, 1.0)
    totals = np.array([h.total for h in hashes], dtype=np.float64)
    return _symmetric(1.0 - _rectification_matrix(totals) * est)


def _mcs_row(args) -> list[float]:
    i, items, budget = args
    row = []
    for j in range(i + 1, len(items)):
        try:
            row.append(1.0 - mcs_similarity(items[i], items[j], budget))
        except Exception as exc:
            raise ComparatorError(i, j, exc) from exc
    return row


def mcs_distance_matrix(items: Sequence[Cfg], node_budget: int = DEFAULT_NODE_BUDGET, workers: int = 1) -> np.ndarray:
    n = len(items)
    out = np.zeros((n, n))
    jobs = [(i, list(items), node_budget) for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_mcs_row, jobs))
    else:
        rows = [_mcs_row(job) for job in jobs]
    for i, row in enumerate(rows):
        out[i, i + 1:] = row
    return _symmetric(out)


def _first_empty(items: Sequence[Cfg]) -> None:
    for i, g in enumerate(items):
        if not g.nodes:
            j = 1 if i == 0 and len(items) > 1 else 0
            raise ComparatorError(i, j, EmptySignatureError(f"item {i} ({g.name!r}) is an empty graph"))


def distance_matrix(
    items: Sequence[Cfg],
    comparator: str = "tah",
    params: ProjectionParams | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
) -> DistanceMatrix:
    """Pairwise distances; signatures and hashes are computed once per item."""
    comparator = canonical_comparator(comparator)
    if not items:
        return DistanceMatrix(np.zeros((0, 0)))
    _first_empty(items)
    params = params or ProjectionParams()
    if comparator == "mcs":
        return DistanceMatrix(mcs_distance_matrix(items, node_budget, workers))
    sigs = [extract_features(g, params.n) for g in items]
    if comparator == "tah_exact":
        return DistanceMatrix(exact_distance_matrix(sigs))
    return DistanceMatrix(hash_distance_matrix([project(s, params) for s in sigs]))


@dataclass(frozen=True)
class Merge:
    keep: int
    absorb: int
    height: float


def hac_merges(m: DistanceMatrix, linkage: str, stop_below: float | None = None) -> list[Merge]:
    """Agglomerative merge sequence with Lance-Williams updates.

    Clusters are named by their lowest member index.  Among equally close
    pairs the lowest (i, j) is merged first.  With ``stop_below`` the run ends
    at the first merge whose height is not below that threshold.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    n = m.size
    d = m.entries.copy()
    np.fill_diagonal(d, np.inf)
    sizes = np.ones(n)
    row_arg = np.argmin(d, axis=1) if n else np.zeros(0, dtype=np.intp)
    row_min = d[np.arange(n), row_arg] if n else np.zeros(0)
    merges: list[Merge] = []
    for _ in range(n - 1):
        i = int(np.argmin(row_min))
        height = float(row_min[i])
        if not np.isfinite(height) or (stop_below is not None and height >= stop_below):
            break
        j = int(row_arg[i])
        merges.append(Merge(i, j, height))

        di, dj = d[i], d[j]
        if linkage == "single":
            new = np.minimum(di, dj)
        elif linkage == "complete":
            new = np.maximum(di, dj)
        else:
            new = (sizes[i] * di + sizes[j] * dj) / (sizes[i] + sizes[j])
        sizes[i] += sizes[j]
        new[i] = np.inf
        new[j] = np.inf
        d[i, :] = new
        d[:, i] = new
        d[j, :] = np.inf
        d[:, j] = np.inf
        row_min[j] = np.inf

        # rows that pointed at i or j need a full rescan; others only see column i change
        stale = (row_arg == i) | (row_arg == j)
        stale[i] = True
        stale[j] = False
        col = d[:, i]
        better = (col < row_min) | ((col == row_min) & (i < row_arg))
        better &= ~stale
        row_min[better] = col[better]
        row_arg[better] = i
        idx = np.flatnonzero(stale)
        if idx.size:
            sub = d[idx]
            row_arg[idx] = np.argmin(sub, axis=1)
            row_min[idx] = sub[np.arange(idx.size), row_arg[idx]]
    return merges


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, keep: int, absorb: int) -> None:
        self.parent[self.find(absorb)] = self.find(keep)

    def labels(self) -> np.ndarray:
        return np.array([self.find(x) for x in range(len(self.parent))], dtype=np.int64)


def labels_to_partition(labels: Sequence[int]) -> list[list[int]]:
    clusters: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        clusters.setdefault(int(lab), []).append(i)
    return sorted(clusters.values())


def hac_cluster(m: DistanceMatrix, linkage: str, threshold: float) -> list[list[int]]:
    """Partition reached by merging closest clusters while their distance is below ``threshold``."""
    uf = _UnionFind(m.size)
    for mg in hac_merges(m, linkage, stop_below=threshold):
        uf.union(mg.keep, mg.absorb)
    return labels_to_partition(uf.labels())


def _encode(values: Sequence) -> np.ndarray:
    _, codes = np.unique(np.asarray(values), return_inverse=True)
    return codes.ravel()


def _precision_recall_labels(cluster_labels: np.ndarray, truth_codes: np.ndarray) -> tuple[float, float]:
    n = len(truth_codes)
    clusters = _encode(cluster_labels)
    n_groups = int(truth_codes.max()) + 1
    table = np.bincount(clusters * n_groups + truth_codes, minlength=(clusters.max() + 1) * n_groups)
    table = table.reshape(-1, n_groups)
    return table.max(axis=1).sum() / n, table.max(axis=0).sum() / n


def precision_recall(partition: Iterable[Iterable[int]], truth: Sequence) -> tuple[float, float]:
    """Cluster precision and recall of ``partition`` against ground-truth labels.

    Precision credits every cluster with its largest overlap with one true
    group; recall credits every true group with its largest overlap with one
    cluster.  Both are normalized by the item count.
    """
    truth_labels = truth.labels if hasattr(truth, "labels") else list(truth)
    n = len(truth_labels)
    cluster_of = np.full(n, -1, dtype=np.int64)
    for c, members in enumerate(partition):
        for i in members:
            if not 0 <= i < n or cluster_of[i] != -1:
                raise ValueError(f"item {i} is unknown or assigned twice")
            cluster_of[i] = c
    if n == 0 or np.any(cluster_of < 0):
        raise ValueError("partition does not cover exactly the ground-truth items")
    return _precision_recall_labels(cluster_of, _encode(truth_labels))


def f_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    clusters: int
    precision: float
    recall: float
    fscore: float


@dataclass
class ClusteringReport:
    linkage: str
    rows: list[SweepRow]
    optimal: SweepRow
    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    cdf: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    def summary(self) -> str:
        return f"optimal F={self.optimal.fscore:.3f} at t={self.optimal.threshold:g}"


def sweep_thresholds(step: float) -> list[float]:
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    count = int(np.floor(1.0 / step + 1e-9))
    values = [round(i * step, 12) for i in range(count + 1)]
    if values[-1] < 1.0:
        values.append(1.0)
    return values


def pair_categories(m: DistanceMatrix, truth_labels: Sequence) -> dict[str, np.ndarray]:
    codes = _encode(truth_labels)
    iu = np.triu_indices(m.size, k=1)
    values = m.entries[iu]
    same = codes[iu[0]] == codes[iu[1]]
    return {"same": values[same], "diff": values[~same], "all": values}


def distance_ranges(m: DistanceMatrix, truth_labels: Sequence) -> dict[str, tuple[float, float]]:
    out = {}
    for cat, vals in pair_categories(m, truth_labels).items():
        out[cat] = (float(vals.min()), float(vals.max())) if vals.size else (float("nan"), float("nan"))
    return out


def distance_cdf(values: np.ndarray, grid: Sequence[float]) -> list[tuple[float, float]]:
    ordered = np.sort(values)
    if ordered.size == 0:
        return [(float(x), 0.0) for x in grid]
    counts = np.searchsorted(ordered, np.asarray(grid), side="right")
    return [(float(x), float(c) / ordered.size) for x, c in zip(grid, counts)]


def threshold_sweep(
    m: DistanceMatrix,
    truth: Sequence,
    linkage: str = "average",
    step: float = DEFAULT_STEP,
) -> ClusteringReport:
    """Score the HAC cut at every threshold 0, step, ..., 1.

    The optimal row minimizes ``|precision - recall|``; ties go to the higher
    F-score, then to the lower threshold.
    """
    truth_labels = truth.labels if hasattr(truth, "labels") else list(truth)
    if len(truth_labels) != m.size:
        raise ValueError("ground truth and distance matrix sizes differ")
    truth_codes = _encode(truth_labels)
    thresholds = sweep_thresholds(step)
    merges = hac_merges(m, linkage)
    uf = _UnionFind(m.size)
    applied = 0
    rows = []
    for t in thresholds:
        # merges form a fixed sequence; a cut at t keeps the prefix below t
        while applied < len(merges) and merges[applied].height < t:
            uf.union(merges[applied].keep, merges[applied].absorb)
            applied += 1
        labels = uf.labels()
        p, r = _precision_recall_labels(labels, truth_codes)
        rows.append(SweepRow(t, m.size - applied, float(p), float(r), f_score(p, r)))
    optimal = min(rows, key=lambda row: (abs(row.precision - row.recall), -row.fscore, row.threshold))
    cats = pair_categories(m, truth_labels)
    return ClusteringReport(
        linkage=linkage,
        rows=rows,
        optimal=optimal,
        ranges=distance_ranges(m, truth_labels),
        cdf={cat: distance_cdf(cats[cat], thresholds) for cat in ("same", "diff")},
    )


def write_report_csv(report: ClusteringReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "clusters", "precision", "recall", "fscore"])
        for row in report.rows:
            w.writerow([f"{row.threshold:.6g}", row.clusters, f"{row.precision:.6f}", f"{row.recall:.6f}", f"{row.fscore:.6f}"])


def write_cdf_csv(report: ClusteringReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category", "distance", "cum_fraction"])
        for cat in ("same", "diff"):
            for x, frac in report.cdf.get(cat, []):
                w.writerow([cat, f"{x:.6g}", f"{frac:.6f}"])


def write_ranges_csv(report: ClusteringReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category", "min", "max"])
        for cat in ("same", "diff", "all"):
            lo, hi = report.ranges[cat]
            w.writerow([cat, f"{lo:.6f}", f"{hi:.6f}"])
