"""Maximum common induced subgraph baseline and a brute-force walk oracle.

The MCS search is a McGregor-style backtracking over node correspondences.
Unmatched nodes are kept in label classes (McSplit): two nodes share a class
when they have the same adjacency pattern towards every already matched pair,
so only nodes in the same class can ever be mapped together, and the sum of
``min(|left|, |right|)`` over classes bounds how far a branch can still grow.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .cfg import Cfg, degrees
from .features import GraphSignature, abstract_node

DEFAULT_NODE_BUDGET = 24
ORACLE_MAX_NODES = 12


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class McsResult:
    size: int
    mapping: dict[int, int] = field(default_factory=dict)


def _label_matrix(g: Cfg, order: list[int]) -> np.ndarray:
    """``m[i, j]``: bit 0 for edge i->j, bit 1 for edge j->i; diagonal marks self-loops."""
    index = {v: i for i, v in enumerate(order)}
    m = np.zeros((len(order), len(order)), dtype=np.int8)
    for s, d in g.edges:
        m[index[s], index[d]] |= 1
        m[index[d], index[s]] |= 2
    return m


def _degree_order(g: Cfg) -> list[int]:
    deg = {v: len(g.successors[v]) + len(g.predecessors[v]) for v in g.nodes}
    return sorted(g.nodes, key=lambda v: (-deg[v], v))


@njit(cache=True)
def _filter_domains(doms, ndoms, left, right, la, lb, v, w, buf):
    out = np.empty((4 * ndoms, 4), dtype=np.int64)
    nout = 0
    for d in range(ndoms):
        l, r, llen, rlen = doms[d, 0], doms[d, 1], doms[d, 2], doms[d, 3]
        lstart = np.zeros(5, dtype=np.int64)
        rstart = np.zeros(5, dtype=np.int64)
        for i in range(llen):
            lstart[la[left[l + i], v] + 1] += 1
        for i in range(rlen):
            rstart[lb[right[r + i], w] + 1] += 1
        for lab in range(4):
            lstart[lab + 1] += lstart[lab]
            rstart[lab + 1] += rstart[lab]
        # counting sort each segment by label, via the scratch buffer
        fill = lstart.copy()
        for i in range(llen):
            x = left[l + i]
            lab = la[x, v]
            buf[fill[lab]] = x
            fill[lab] += 1
        for i in range(llen):
            left[l + i] = buf[i]
        fill = rstart.copy()
        for i in range(rlen):
            y = right[r + i]
            lab = lb[y, w]
            buf[fill[lab]] = y
            fill[lab] += 1
        for i in range(rlen):
            right[r + i] = buf[i]
        for lab in range(4):
            nl = lstart[lab + 1] - lstart[lab]
            nr = rstart[lab + 1] - rstart[lab]
            if nl > 0 and nr > 0:
                out[nout, 0] = l + lstart[lab]
                out[nout, 1] = r + rstart[lab]
                out[nout, 2] = nl
                out[nout, 3] = nr
                nout += 1
    return out, nout


@njit(cache=True)
def _solve(la, lb, left, right, doms, ndoms, cur, depth, best, best_len, buf):
    if depth > best_len[0]:
        best[:depth] = cur[:depth]
        best_len[0] = depth
    bound = depth
    for d in range(ndoms):
        bound += min(doms[d, 2], doms[d, 3])
    if bound <= best_len[0]:
        return

    # smallest domain first; ties go to the one holding the lowest-ranked left node
    bd = -1
    best_size = 1 << 30
    best_tie = 1 << 30
    for d in range(ndoms):
        size = max(doms[d, 2], doms[d, 3])
        tie = 1 << 30
        for i in range(doms[d, 2]):
            tie = min(tie, left[doms[d, 0] + i])
        if size < best_size or (size == best_size and tie < best_tie):
            bd, best_size, best_tie = d, size, tie
    if bd < 0:
        return

    l, r = doms[bd, 0], doms[bd, 1]
    llen = doms[bd, 2]
    p = 0
    for i in range(1, llen):
        if left[l + i] < left[l + p]:
            p = i
    v = left[l + p]
    left[l + p] = left[l + llen - 1]
    left[l + llen - 1] = v
    doms[bd, 2] = llen - 1

    doms[bd, 3] -= 1
    rlen = doms[bd, 3]
    w = -1
    for _ in range(rlen + 1):
        p = -1
        for i in range(rlen + 1):
            y = right[r + i]
            if y > w and (p < 0 or y < right[r + p]):
                p = i
        w = right[r + p]
        right[r + p] = right[r + rlen]
        right[r + rlen] = w
        child, nchild = _filter_domains(doms, ndoms, left, right, la, lb, v, w, buf)
        cur[depth, 0] = v
        cur[depth, 1] = w
        _solve(la, lb, left, right, child, nchild, cur, depth + 1, best, best_len, buf)
        if bound <= best_len[0]:
            doms[bd, 3] += 1
            return
    doms[bd, 3] += 1

    # branch where v stays unmatched
    if doms[bd, 2] == 0:
        doms[bd, 0], doms[bd, 1], doms[bd, 2], doms[bd, 3] = (
            doms[ndoms - 1, 0], doms[ndoms - 1, 1], doms[ndoms - 1, 2], doms[ndoms - 1, 3])
        ndoms -= 1
    _solve(la, lb, left, right, doms, ndoms, cur, depth, best, best_len, buf)


def _search(a: Cfg, b: Cfg) -> list[tuple[int, int]]:
    order_a, order_b = _degree_order(a), _degree_order(b)
    la, lb = _label_matrix(a, order_a), _label_matrix(b, order_b)
    # the initial split separates nodes with and without self-loops
    left_groups = [[i for i in range(len(order_a)) if (la[i, i] != 0) == loop] for loop in (False, True)]
    right_groups = [[j for j in range(len(order_b)) if (lb[j, j] != 0) == loop] for loop in (False, True)]
    left = np.array(left_groups[0] + left_groups[1], dtype=np.int64)
    right = np.array(right_groups[0] + right_groups[1], dtype=np.int64)
    doms = np.zeros((2, 4), dtype=np.int64)
    ndoms = 0
    lpos = rpos = 0
    for lg, rg in zip(left_groups, right_groups):
        if lg and rg:
            doms[ndoms] = (lpos, rpos, len(lg), len(rg))
            ndoms += 1
        lpos += len(lg)
        rpos += len(rg)
    size = min(len(order_a), len(order_b))
    cur = np.zeros((size, 2), dtype=np.int64)
    best = np.zeros((size, 2), dtype=np.int64)
    best_len = np.zeros(1, dtype=np.int64)
    buf = np.zeros(max(len(order_a), len(order_b)), dtype=np.int64)
    _solve(la, lb, left, right, doms, ndoms, cur, 0, best, best_len, buf)
    return [(order_a[i], order_b[j]) for i, j in best[: best_len[0]]]


def mcs_size(a: Cfg, b: Cfg, node_budget: int = DEFAULT_NODE_BUDGET) -> McsResult:
    """Largest common induced subgraph under an adjacency-preserving injective map.

    The common subgraph need not be connected.
    """
    for g in (a, b):
        if len(g.nodes) > node_budget:
            raise BudgetExceededError(f"graph {g.name!r} has {len(g.nodes)} nodes, budget is {node_budget}")
    if not a.nodes or not b.nodes:
        return McsResult(0, {})
    mapping = dict(_search(a, b))
    return McsResult(len(mapping), dict(sorted(mapping.items())))


def mcs_similarity(a: Cfg, b: Cfg, node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    if not a.nodes or not b.nodes:
        raise ValueError("MCS similarity is undefined for empty graphs")
    return mcs_size(a, b, node_budget).size / max(len(a.nodes), len(b.nodes))


def enumerate_walks_oracle(g: Cfg, n: int) -> GraphSignature:
    """Literal depth-first listing of every walk of 1..n nodes; small graphs only."""
    if len(g.nodes) > ORACLE_MAX_NODES:
        raise BudgetExceededError(f"oracle accepts at most {ORACLE_MAX_NODES} nodes")
    if n < 1:
        raise ValueError("n must be >= 1")
    code = {v: abstract_node(degrees(g, v)).code for v in g.nodes}
    succ = {v: [d for s, d in g.edges if s == v] for v in g.nodes}
    counts: Counter[str] = Counter()

    def walk(path: list[int]) -> None:
        counts["|".join(code[v] for v in path)] += 1
        if len(path) == n:
            return
        for nxt in succ[path[-1]]:
            path.append(nxt)
            walk(path)
            path.pop()

    for v in g.nodes:
        walk([v])
    return GraphSignature(n, counts)
