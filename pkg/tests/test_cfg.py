import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tah.cfg import (
    FIG2_SAMPLE,
    Cfg,
    CfgSemanticError,
    CfgSyntaxError,
    DegreePair,
    degrees,
    parse_cfg,
    serialize_cfg,
)
from tah.features import abstract_node

FIG2_JSON = '{"name":"fig2","nodes":[0,1,2,3,4],"edges":[[0,1],[0,2],[1,2],[1,4],[2,3],[3,4]]}'


@st.composite
def cfgs(draw, max_nodes=8):
    nodes = draw(st.sets(st.integers(0, 50), max_size=max_nodes))
    ordered = sorted(nodes)
    edges = draw(st.sets(st.tuples(st.sampled_from(ordered), st.sampled_from(ordered)), max_size=20)) if ordered else set()
    name = draw(st.text(alphabet="abcxyz_-0123", max_size=6))
    return Cfg(name, frozenset(nodes), frozenset(edges))


def test_parse_minimal():
    g = parse_cfg('{"name":"t","nodes":[0,1],"edges":[[0,1]]}', "json")
    assert g.nodes == {0, 1}
    assert g.edges == {(0, 1)}
    assert g.name == "t"


def test_parse_fig2_degree_profile():
    g = parse_cfg(FIG2_JSON)
    assert (len(g.nodes), len(g.edges)) == (5, 6)
    types = sorted(abstract_node(degrees(g, v)).code for v in g.nodes)
    assert types == sorted(["02", "12", "21", "11", "20"])
    assert g == FIG2_SAMPLE


def test_dangling_edge_reports_location():
    with pytest.raises(CfgSemanticError, match="unknown node 1") as info:
        parse_cfg('{"name":"t","nodes":[0],"edges":[[0,1]]}')
    assert info.value.location == "$.edges[0]"


@pytest.mark.parametrize(
    "text, error",
    [
        ('{"name":"t","nodes":[0,1],"edges":[[0,1],[0,1]]}', CfgSemanticError),
        ('{"name":"t","nodes":[0,0],"edges":[]}', CfgSemanticError),
        ('{"name":"t","nodes":[0],"edges":[],"extra":1}', CfgSyntaxError),
        ('{"name":"t","nodes":[-1],"edges":[]}', CfgSyntaxError),
        ('{"name":"t","nodes":[true],"edges":[]}', CfgSyntaxError),
        ('{"name":"t","nodes":[0],"edges":[[0]]}', CfgSyntaxError),
        ('{"name":"t","nodes":[0]}', CfgSyntaxError),
        ('{"name":"t",', CfgSyntaxError),
        ("[]", CfgSyntaxError),
    ],
)
def test_json_errors(text, error):
    with pytest.raises(error):
        parse_cfg(text, "json")


def test_json_syntax_error_has_line():
    with pytest.raises(CfgSyntaxError) as info:
        parse_cfg('{\n"name": "t",\n"nodes": [0,,]}')
    assert info.value.location.startswith("line 3")


def test_edgelist_parse():
    text = "# name: demo\n# a comment\n0 1\n1 2  # trailing\n\nnode 7\n"
    g = parse_cfg(text, "edgelist")
    assert g.name == "demo"
    assert g.nodes == {0, 1, 2, 7}
    assert g.edges == {(0, 1), (1, 2)}


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("0 1\n0 1\n", CfgSemanticError, "line 2"),
        ("0 1 2\n", CfgSyntaxError, "line 1"),
        ("0 x\n", CfgSyntaxError, "line 1"),
        ("0 1\nnode\n", CfgSyntaxError, "line 2"),
    ],
)
def test_edgelist_errors(text, error, line):
    with pytest.raises(error) as info:
        parse_cfg(text, "edgelist")
    assert info.value.location == line


def test_serialize_canonical():
    g = Cfg("t", frozenset({1, 0}), frozenset({(1, 0), (0, 1)}))
    assert serialize_cfg(g) == '{"name":"t","nodes":[0,1],"edges":[[0,1],[1,0]]}'
    assert serialize_cfg(Cfg("e", frozenset())) == '{"name":"e","nodes":[],"edges":[]}'


@pytest.mark.parametrize("fmt", ["json", "edgelist"])
def test_fig2_round_trip(fmt):
    assert parse_cfg(serialize_cfg(FIG2_SAMPLE, fmt), fmt) == FIG2_SAMPLE


@settings(max_examples=150, deadline=None)
@given(cfgs(), st.sampled_from(["json", "edgelist"]))
def test_round_trip_property(g, fmt):
    assert parse_cfg(serialize_cfg(g, fmt), fmt) == g


@settings(max_examples=60, deadline=None)
@given(cfgs(), st.randoms(use_true_random=False))
def test_parse_order_insensitive(g, rnd):
    nodes = g.sorted_nodes()
    edges = [list(e) for e in g.sorted_edges()]
    rnd.shuffle(nodes)
    rnd.shuffle(edges)
    import json

    text = json.dumps({"edges": edges, "nodes": nodes, "name": g.name})
    assert parse_cfg(text) == g
    lines = [f"{s} {d}" for s, d in edges] + [f"node {v}" for v in nodes]
    rnd.shuffle(lines)
    assert parse_cfg("\n".join(lines), "edgelist") == Cfg("", g.nodes, g.edges)


def test_degrees():
    assert degrees(FIG2_SAMPLE, 0) == DegreePair(0, 2)
    assert degrees(Cfg("iso", frozenset({3})), 3) == (0, 0)
    assert degrees(Cfg("loop", frozenset({0}), frozenset({(0, 0)})), 0) == (1, 1)
    with pytest.raises(KeyError):
        degrees(FIG2_SAMPLE, 99)


@settings(max_examples=100, deadline=None)
@given(cfgs())
def test_degree_conservation(g):
    ins = sum(degrees(g, v).indegree for v in g.nodes)
    outs = sum(degrees(g, v).outdegree for v in g.nodes)
    assert ins == outs == len(g.edges)


def test_constructor_rejects_dangling_edge():
    with pytest.raises(CfgSemanticError):
        Cfg("bad", frozenset({0}), frozenset({(0, 1)}))
    with pytest.raises(CfgSemanticError):
        Cfg.from_edges([(0, 1), (0, 1)])


def test_relabel_preserves_shape():
    rng = random.Random(1)
    perm = list(range(5))
    rng.shuffle(perm)
    h = FIG2_SAMPLE.relabel({v: 10 + perm[v] for v in range(5)})
    assert len(h.edges) == 6 and min(h.nodes) == 10
