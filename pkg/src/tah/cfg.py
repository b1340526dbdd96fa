"""Control flow graph model: validation, parsing and canonical serialization.

Two text formats are supported:

* ``json``: ``{"name": str, "nodes": [int, ...], "edges": [[src, dst], ...]}``.
  Unknown keys are rejected.
* ``edgelist``: one ``src dst`` pair per line, ``#`` starts a comment,
  ``node <id>`` declares a (possibly isolated) node.  A leading
  ``# name: <label>`` comment carries the graph name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

FORMATS = ("json", "edgelist")


class CfgError(ValueError):
    """Base class for CFG parsing and validation failures."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class CfgSyntaxError(CfgError):
    pass


class CfgSemanticError(CfgError):
    pass


class DegreePair(NamedTuple):
    indegree: int
    outdegree: int


@dataclass(frozen=True)
class Cfg:
    """Immutable directed graph over non-negative integer node ids."""

    name: str
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for v in self.nodes:
            if not _is_node_id(v):
                raise CfgSemanticError(f"invalid node id {v!r}")
        for src, dst in self.edges:
            for end in (src, dst):
                if end not in self.nodes:
                    raise CfgSemanticError(f"edge ({src}, {dst}) references unknown node {end}")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = (), name: str = "") -> Cfg:
        """Build a graph whose node set is ``nodes`` plus every edge endpoint."""
        edges = [tuple(e) for e in edges]
        all_nodes = set(nodes)
        for src, dst in edges:
            all_nodes.update((src, dst))
        if len(set(edges)) != len(edges):
            raise CfgSemanticError("duplicate edge")
        return cls(name, frozenset(all_nodes), frozenset(edges))

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        succ: dict[int, list[int]] = {v: [] for v in self.nodes}
        for src, dst in self.edges:
            succ[src].append(dst)
        return {v: tuple(sorted(s)) for v, s in succ.items()}

    @cached_property
    def predecessors(self) -> dict[int, tuple[int, ...]]:
        pred: dict[int, list[int]] = {v: [] for v in self.nodes}
        for src, dst in self.edges:
            pred[dst].append(src)
        return {v: tuple(sorted(p)) for v, p in pred.items()}

    def sorted_nodes(self) -> list[int]:
        return sorted(self.nodes)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def relabel(self, mapping: dict[int, int], name: str | None = None) -> Cfg:
        """Return a copy with node ids replaced through an injective ``mapping``."""
        if len(set(mapping[v] for v in self.nodes)) != len(self.nodes):
            raise ValueError("relabel mapping is not injective")
        return Cfg(
            self.name if name is None else name,
            frozenset(mapping[v] for v in self.nodes),
            frozenset((mapping[s], mapping[d]) for s, d in self.edges),
        )


def _is_node_id(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def degrees(g: Cfg, node: int) -> DegreePair:
    """In/out edge counts of ``node``; a self-loop counts once toward each."""
    if node not in g.nodes:
        raise KeyError(f"unknown node {node}")
    return DegreePair(len(g.predecessors[node]), len(g.successors[node]))


def parse_cfg(text: str, format: str = "json") -> Cfg:
    if format == "json":
        return _parse_json(text)
    if format == "edgelist":
        return _parse_edgelist(text)
    raise ValueError(f"unknown CFG format {format!r}; expected one of {FORMATS}")


def serialize_cfg(g: Cfg, format: str = "json") -> str:
    """Canonical text form: nodes and edges in ascending order."""
    if format == "json":
        doc = {"name": g.name, "nodes": g.sorted_nodes(), "edges": [list(e) for e in g.sorted_edges()]}
        return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)
    if format == "edgelist":
        lines = []
        if g.name:
            lines.append(f"# name: {g.name}")
        touched = {v for e in g.edges for v in e}
        lines.extend(f"node {v}" for v in g.sorted_nodes() if v not in touched)
        lines.extend(f"{s} {d}" for s, d in g.sorted_edges())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown CFG format {format!r}; expected one of {FORMATS}")


def _parse_json(text: str) -> Cfg:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CfgSyntaxError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise CfgSyntaxError("top-level value must be an object", "$")
    unknown = sorted(set(doc) - {"name", "nodes", "edges"})
    if unknown:
        raise CfgSyntaxError(f"unknown key {unknown[0]!r}", "$")
    for key in ("name", "nodes", "edges"):
        if key not in doc:
            raise CfgSyntaxError(f"missing key {key!r}", "$")
    name, raw_nodes, raw_edges = doc["name"], doc["nodes"], doc["edges"]
    if not isinstance(name, str):
        raise CfgSyntaxError("name must be a string", "$.name")
    if not isinstance(raw_nodes, list):
        raise CfgSyntaxError("nodes must be an array", "$.nodes")
    if not isinstance(raw_edges, list):
        raise CfgSyntaxError("edges must be an array", "$.edges")

    nodes: set[int] = set()
    for i, v in enumerate(raw_nodes):
        if not _is_node_id(v):
            raise CfgSyntaxError(f"node id must be a non-negative integer, got {v!r}", f"$.nodes[{i}]")
        if v in nodes:
            raise CfgSemanticError(f"duplicate node {v}", f"$.nodes[{i}]")
        nodes.add(v)

    edges: set[tuple[int, int]] = set()
    for i, e in enumerate(raw_edges):
        loc = f"$.edges[{i}]"
        if not (isinstance(e, list) and len(e) == 2 and all(_is_node_id(x) for x in e)):
            raise CfgSyntaxError(f"edge must be a pair of non-negative integers, got {e!r}", loc)
        src, dst = e
        for end in (src, dst):
            if end not in nodes:
                raise CfgSemanticError(f"unknown node {end}", loc)
        if (src, dst) in edges:
            raise CfgSemanticError(f"duplicate edge ({src}, {dst})", loc)
        edges.add((src, dst))
    return Cfg(name, frozenset(nodes), frozenset(edges))


def _parse_int(token: str, loc: str) -> int:
    if not token.isdigit():
        raise CfgSyntaxError(f"expected a non-negative integer, got {token!r}", loc)
    return int(token)


def _parse_edgelist(text: str) -> Cfg:
    name = ""
    nodes: set[int] = set()
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        loc = f"line {lineno}"
        stripped = raw.strip()
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("name:") and not nodes and not edges:
                name = body[len("name:"):].strip()
            continue
        content = stripped.split("#", 1)[0].split()
        if not content:
            continue
        if content[0] == "node":
            if len(content) != 2:
                raise CfgSyntaxError("expected 'node <id>'", loc)
            nodes.add(_parse_int(content[1], loc))
            continue
        if len(content) != 2:
            raise CfgSyntaxError(f"expected 'src dst', got {stripped!r}", loc)
        src, dst = (_parse_int(t, loc) for t in content)
        if (src, dst) in edges:
            raise CfgSemanticError(f"duplicate edge ({src}, {dst})", loc)
        edges.add((src, dst))
        nodes.update((src, dst))
    return Cfg(name, frozenset(nodes), frozenset(edges))


def read_cfg(path, format: str | None = None) -> Cfg:
    """Load a CFG file; the format defaults to ``json`` for ``*.json`` and ``edgelist`` otherwise."""
    path = str(path)
    if format is None:
        format = "json" if path.endswith(".json") else "edgelist"
    with open(path, encoding="utf-8") as fh:
        return parse_cfg(fh.read(), format)


FIG2_SAMPLE = Cfg(
    "fig2",
    frozenset(range(5)),
    frozenset({(0, 1), (0, 2), (1, 2), (1, 4), (2, 3), (3, 4)}),
)
