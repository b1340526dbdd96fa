import csv
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cfg
from tah.cfg import FIG2_SAMPLE, Cfg
from tah.clustering import (
    ComparatorError,
    DistanceMatrix,
    canonical_comparator,
    distance_cdf,
    distance_matrix,
    f_score,
    hac_cluster,
    hac_merges,
    precision_recall,
    sweep_thresholds,
    threshold_sweep,
    write_cdf_csv,
    write_ranges_csv,
    write_report_csv,
)
from tah.features import extract_features
from tah.fuzzyhash import hash_distance, project
from tah.similarity import exact_distance

FOUR = np.array([
    [0.0, 0.1, 0.9, 0.9],
    [0.1, 0.0, 0.9, 0.9],
    [0.9, 0.9, 0.0, 0.2],
    [0.9, 0.9, 0.2, 0.0],
])


def _random_matrix(rng, n):
    upper = np.triu(rng.random((n, n)), k=1)
    return DistanceMatrix(upper + upper.T)


def _naive_hac(d, linkage, threshold):
    # recompute every cluster distance from the members at each step
    clusters = [[i] for i in range(len(d))]
    agg = {"single": np.min, "complete": np.max, "average": np.mean}[linkage]
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                dist = agg(d[np.ix_(clusters[a], clusters[b])])
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        if best[0] >= threshold:
            break
        _, a, b = best
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
    return sorted(clusters)


def _small_items(seed, count=8):
    rng = random.Random(seed)
    return [g for g in (random_cfg(rng, max_nodes=8, p=0.3) for _ in range(count * 2)) if g.nodes][:count]


def test_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, 0.1], [0.2, 0.0]]))
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.5, 0.1], [0.1, 0.0]]))
    with pytest.raises(ValueError):
        DistanceMatrix(np.array([[0.0, 1.5], [1.5, 0.0]]))


def test_single_item_and_duplicates():
    m = distance_matrix([FIG2_SAMPLE], "tah")
    assert m.entries.shape == (1, 1) and m.entries[0, 0] == 0.0
    dup = distance_matrix([FIG2_SAMPLE, FIG2_SAMPLE.relabel({v: v + 5 for v in range(5)})], "exact")
    assert dup.entries[0, 1] == 0.0


def test_comparator_names():
    assert canonical_comparator("exact") == "tah_exact"
    with pytest.raises(ValueError):
        canonical_comparator("ssdeep")


def test_vectorized_matrices_match_pairwise():
    items = _small_items(3)
    sigs = [extract_features(g) for g in items]
    hashes = [project(s) for s in sigs]
    exact = distance_matrix(items, "tah_exact").entries
    hashed = distance_matrix(items, "tah").entries
    for i in range(len(items)):
        for j in range(len(items)):
            if i != j:
                assert exact[i, j] == pytest.approx(exact_distance(sigs[i], sigs[j]), abs=1e-12)
                assert hashed[i, j] == pytest.approx(hash_distance(hashes[i], hashes[j]), abs=1e-12)


def test_mcs_matrix_workers_agree():
    items = _small_items(4, count=5)
    one = distance_matrix(items, "mcs").entries
    two = distance_matrix(items, "mcs", workers=2).entries
    assert np.array_equal(one, two)


def test_empty_item_raises_comparator_error():
    items = [FIG2_SAMPLE, Cfg("empty", frozenset())]
    for comp in ("tah", "tah_exact", "mcs"):
        with pytest.raises(ComparatorError) as info:
            distance_matrix(items, comp)
        assert 1 in info.value.pair


@pytest.mark.parametrize("linkage", ["single", "average", "complete"])
def test_hac_four_items(linkage):
    m = DistanceMatrix(FOUR)
    assert hac_cluster(m, linkage, 0.5) == [[0, 1], [2, 3]]
    assert hac_cluster(m, linkage, 0.0) == [[0], [1], [2], [3]]
    assert hac_cluster(m, linkage, 1.0) == [[0, 1, 2, 3]]


def test_hac_tie_break_lowest_pair():
    d = np.full((3, 3), 0.5)
    np.fill_diagonal(d, 0.0)
    merges = hac_merges(DistanceMatrix(d), "single")
    assert (merges[0].keep, merges[0].absorb) == (0, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.sampled_from(["single", "average", "complete"]),
       st.floats(0.0, 1.0))
def test_hac_matches_naive(seed, n, linkage, t):
    m = _random_matrix(np.random.default_rng(seed), n)
    assert hac_cluster(m, linkage, t) == _naive_hac(m.entries, linkage, t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 15))
def test_single_linkage_is_connected_components(seed, n):
    m = _random_matrix(np.random.default_rng(seed), n)
    t = 0.3
    adj = m.entries < t
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.flatnonzero(adj[u]):
                if int(v) not in seen:
                    seen.add(int(v))
                    stack.append(int(v))
        comps.append(sorted(comp))
    assert hac_cluster(m, "single", t) == sorted(comps)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_cluster_count_monotone(seed, n):
    m = _random_matrix(np.random.default_rng(seed), n)
    counts = [len(hac_cluster(m, "single", t)) for t in np.linspace(0, 1, 11)]
    assert counts == sorted(counts, reverse=True)


def test_precision_recall_examples():
    truth = ["a", "a", "b", "b"]
    assert precision_recall([[0, 1], [2, 3]], truth) == (1.0, 1.0)
    assert precision_recall([[0], [1], [2], [3]], truth) == (1.0, 0.5)
    assert precision_recall([[0, 1, 2, 3]], truth) == (0.5, 1.0)
    assert precision_recall([[0, 2], [1, 3]], truth) == (0.5, 0.5)
    with pytest.raises(ValueError):
        precision_recall([[0, 1]], truth)
    with pytest.raises(ValueError):
        precision_recall([[0, 1], [1, 2, 3]], truth)
    assert f_score(1.0, 0.5) == pytest.approx(2 / 3)
    assert f_score(0.0, 0.0) == 0.0


def test_sweep_thresholds():
    assert sweep_thresholds(1.0) == [0.0, 1.0]
    assert sweep_thresholds(0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(sweep_thresholds(0.005)) == 201
    assert sweep_thresholds(0.3)[-1] == 1.0
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            sweep_thresholds(bad)


def test_threshold_sweep_endpoints():
    truth = ["a", "a", "b", "b"]
    rep = threshold_sweep(DistanceMatrix(FOUR), truth, "average", step=0.1)
    first, last = rep.rows[0], rep.rows[-1]
    assert (first.threshold, first.clusters, first.precision) == (0.0, 4, 1.0)
    assert (last.threshold, last.clusters, last.recall) == (1.0, 1, 1.0)
    assert rep.optimal.fscore == 1.0
    assert rep.optimal.threshold == pytest.approx(0.3)
    assert rep.summary() == "optimal F=1.000 at t=0.3"
    assert rep.ranges["same"] == (0.1, 0.2) and rep.ranges["diff"] == (0.9, 0.9)


def test_sweep_step_one():
    rep = threshold_sweep(DistanceMatrix(FOUR), ["a", "a", "b", "b"], "single", step=1.0)
    assert [r.threshold for r in rep.rows] == [0.0, 1.0]


def test_sweep_size_mismatch():
    with pytest.raises(ValueError):
        threshold_sweep(DistanceMatrix(FOUR), ["a", "b"])


def test_distance_cdf():
    vals = np.array([0.1, 0.2, 0.2, 0.9])
    assert distance_cdf(vals, [0.0, 0.2, 1.0]) == [(0.0, 0.0), (0.2, 0.75), (1.0, 1.0)]
    assert distance_cdf(np.array([]), [0.5]) == [(0.5, 0.0)]


def test_csv_writers(tmp_path):
    rep = threshold_sweep(DistanceMatrix(FOUR), ["a", "a", "b", "b"], "complete", step=0.5)
    write_report_csv(rep, tmp_path / "r.csv")
    write_cdf_csv(rep, tmp_path / "c.csv")
    write_ranges_csv(rep, tmp_path / "g.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["threshold", "clusters", "precision", "recall", "fscore"]
    assert rows[1] == ["0", "4", "1.000000", "0.500000", "0.666667"]
    assert len(rows) == 4
    cdf = list(csv.reader(open(tmp_path / "c.csv")))
    assert cdf[0] == ["category", "distance", "cum_fraction"]
    assert {r[0] for r in cdf[1:]} == {"same", "diff"}
    ranges = list(csv.reader(open(tmp_path / "g.csv")))
    assert ranges[1:] == [["same", "0.100000", "0.200000"], ["diff", "0.900000", "0.900000"],
                          ["all", "0.100000", "0.900000"]]
