"""Wall-clock comparison of comparators over all item pairs."""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .baseline import DEFAULT_NODE_BUDGET, mcs_similarity
from .cfg import Cfg
from .clustering import canonical_comparator
from .features import extract_features
from .fuzzyhash import ProjectionParams, hash_similarity, project
from .similarity import exact_similarity


@dataclass(frozen=True)
class Timing:
    comparator: str
    items: int
    pairs: int
    generate_s: float
    pairs_cached_s: float
    pairs_uncached_s: float | None

    @property
    def cached_total_s(self) -> float:
        return self.generate_s + self.pairs_cached_s


def _embed(comparator: str, g: Cfg, params: ProjectionParams):
    sig = extract_features(g, params.n)
    return project(sig, params) if comparator == "tah" else sig


def time_comparator(
    items: Sequence[Cfg],
    comparator: str,
    params: ProjectionParams | None = None,
    uncached: bool = True,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Timing:
    """Time every pairwise comparison, one library call per pair.

    For the signature comparators, ``generate_s`` covers building the cached
    signature or hash of every item and ``pairs_cached_s`` the comparisons on
    those; ``pairs_uncached_s`` rebuilds both inputs inside every comparison.
    MCS has no intermediate form, so only its raw pair time is reported.
    """
    comparator = canonical_comparator(comparator)
    params = params or ProjectionParams()
    pairs = list(combinations(range(len(items)), 2))

    if comparator == "mcs":
        start = time.perf_counter()
        for i, j in pairs:
            mcs_similarity(items[i], items[j], node_budget)
        elapsed = time.perf_counter() - start
        return Timing(comparator, len(items), len(pairs), 0.0, elapsed, None)

    compare = hash_similarity if comparator == "tah" else exact_similarity
    start = time.perf_counter()
    cache = [_embed(comparator, g, params) for g in items]
    generate = time.perf_counter() - start

    start = time.perf_counter()
    for i, j in pairs:
        compare(cache[i], cache[j])
    cached = time.perf_counter() - start

    raw = None
    if uncached:
        start = time.perf_counter()
        for i, j in pairs:
            compare(_embed(comparator, items[i], params), _embed(comparator, items[j], params))
        raw = time.perf_counter() - start
    return Timing(comparator, len(items), len(pairs), generate, cached, raw)


def format_table(timings: Sequence[Timing]) -> str:
    header = f"{'comparator':<10} {'items':>6} {'pairs':>8} {'generate_s':>11} {'pairs_cached_s':>15} {'pairs_uncached_s':>17}"
    lines = [header]
    for t in timings:
        raw = "-" if t.pairs_uncached_s is None else f"{t.pairs_uncached_s:.4f}"
        lines.append(
            f"{t.comparator:<10} {t.items:>6} {t.pairs:>8} {t.generate_s:>11.4f} {t.pairs_cached_s:>15.4f} {raw:>17}"
        )
    return "\n".join(lines)
