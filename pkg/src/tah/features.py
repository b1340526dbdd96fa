"""Degree-based node typing and blended n-gram graph signatures."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence

from .cfg import Cfg, DegreePair, degrees

DEFAULT_N = 5
MAX_BUCKET = 3
UINT32_MAX = 2**32 - 1


class NodeType(NamedTuple):
    in_bucket: int
    out_bucket: int

    @property
    def code(self) -> str:
        return f"{self.in_bucket}{self.out_bucket}"

    @classmethod
    def from_code(cls, code: str) -> NodeType:
        if len(code) != 2 or not code.isdigit():
            raise ValueError(f"bad node type code {code!r}")
        t = cls(int(code[0]), int(code[1]))
        if t.in_bucket > MAX_BUCKET or t.out_bucket > MAX_BUCKET:
            raise ValueError(f"bad node type code {code!r}")
        return t


ALL_TYPES = tuple(NodeType(i, o) for i in range(MAX_BUCKET + 1) for o in range(MAX_BUCKET + 1))


class SignatureOverflowError(OverflowError):
    pass


def abstract_node(d: DegreePair) -> NodeType:
    return NodeType(min(d.indegree, MAX_BUCKET), min(d.outdegree, MAX_BUCKET))


def canonical_key(feature: Sequence[NodeType]) -> str:
    return "|".join(t.code for t in feature)


def decode_key(key: str) -> tuple[NodeType, ...]:
    return tuple(NodeType.from_code(c) for c in key.split("|"))


def is_valid_feature(feature: Sequence[NodeType]) -> bool:
    """Zero-indegree types may only lead a gram and zero-outdegree types may only end it."""
    if not feature:
        return False
    last = len(feature) - 1
    for pos, t in enumerate(feature):
        if t.in_bucket == 0 and pos != 0:
            return False
        if t.out_bucket == 0 and pos != last:
            return False
    return True


def feature_space_size(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    starts = sum(1 for t in ALL_TYPES if t.out_bucket > 0)
    ends = sum(1 for t in ALL_TYPES if t.in_bucket > 0)
    interior = sum(1 for t in ALL_TYPES if t.in_bucket > 0 and t.out_bucket > 0)
    return len(ALL_TYPES) + sum(starts * interior ** (k - 2) * ends for k in range(2, n + 1))


@dataclass(frozen=True)
class GraphSignature:
    """Sparse count vector over blended n-gram feature keys."""

    n: int
    counts: Mapping[str, int] = field(default_factory=dict)
    total: int = -1

    def __post_init__(self):
        counts = dict(self.counts)
        for key, c in counts.items():
            if not isinstance(c, int) or c <= 0:
                raise ValueError(f"count for {key!r} must be a positive integer")
            if c > UINT32_MAX:
                raise SignatureOverflowError(f"count for {key!r} exceeds 32 bits")
        total = sum(counts.values())
        if self.total not in (-1, total):
            raise ValueError(f"total {self.total} does not match sum of counts {total}")
        if total > UINT32_MAX:
            raise SignatureOverflowError("feature total exceeds 32 bits")
        object.__setattr__(self, "counts", MappingProxyType(dict(sorted(counts.items()))))
        object.__setattr__(self, "total", total)

    def __eq__(self, other):
        if not isinstance(other, GraphSignature):
            return NotImplemented
        return self.n == other.n and dict(self.counts) == dict(other.counts)

    def __hash__(self):
        return hash((self.n, tuple(self.counts.items())))

    def __len__(self) -> int:
        return len(self.counts)

    def restrict(self, max_len: int) -> GraphSignature:
        """Keep only features of length <= ``max_len``."""
        return GraphSignature(
            max_len, {k: c for k, c in self.counts.items() if k.count("|") < max_len}
        )

    def scaled(self, factor: int) -> GraphSignature:
        return GraphSignature(self.n, {k: c * factor for k, c in self.counts.items()})

    def to_text(self) -> str:
        lines = [f"{k}\t{c}" for k, c in self.counts.items()]
        lines.append(f"TOTAL\t{self.total}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n: int = DEFAULT_N) -> GraphSignature:
        counts: dict[str, int] = {}
        total = None
        for line in text.splitlines():
            if not line.strip():
                continue
            key, value = line.split("\t")
            if key == "TOTAL":
                total = int(value)
            else:
                counts[key] = int(value)
        sig = cls(n, counts)
        if total is not None and total != sig.total:
            raise ValueError(f"TOTAL line {total} disagrees with counts {sig.total}")
        return sig


def node_types(g: Cfg) -> dict[int, NodeType]:
    return {v: abstract_node(degrees(g, v)) for v in g.nodes}


def extract_features(g: Cfg, n: int = DEFAULT_N) -> GraphSignature:
    """Count the type sequence of every walk of 1..n nodes, from every start node.

    Walks may revisit nodes.  Counts are built level by level: the grams of
    length k starting at v are v's type prefixed to the grams of length k-1
    starting at each successor of v.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    codes = {v: t.code for v, t in node_types(g).items()}
    succ = g.successors
    level: dict[int, Counter[str]] = {v: Counter({codes[v]: 1}) for v in g.nodes}
    totals: Counter[str] = Counter()
    for v in g.nodes:
        totals.update(level[v])
    for _ in range(2, n + 1):
        nxt: dict[int, Counter[str]] = {}
        for v in g.nodes:
            prefix = codes[v] + "|"
            grams: Counter[str] = Counter()
            for w in succ[v]:
                for tail, c in level[w].items():
                    grams[prefix + tail] += c
            nxt[v] = grams
            totals.update(grams)
        level = nxt
    return GraphSignature(n, totals)

