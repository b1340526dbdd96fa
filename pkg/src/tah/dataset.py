"""Synthetic ground-truth CFG datasets built from single edit operations."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .cfg import Cfg, read_cfg, serialize_cfg
from .features import DEFAULT_N, extract_features

MAX_DEGREE = 3
LABELS_FILE = "labels.csv"

EDIT_OPS = ("orig", "addnode", "delnode", "addedge", "deledge")


class Variant(NamedTuple):
    op: str
    cfg: Cfg


class Item(NamedTuple):
    name: str
    cfg: Cfg
    group: str


@dataclass
class GroundTruthDataset:
    items: list[Item]

    def __post_init__(self):
        names = [it.name for it in self.items]
        if len(set(names)) != len(names):
            raise ValueError("dataset item names must be unique")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def cfgs(self) -> list[Cfg]:
        return [it.cfg for it in self.items]

    @property
    def labels(self) -> list[str]:
        return [it.group for it in self.items]

    @property
    def groups(self) -> list[str]:
        return sorted(set(self.labels))

    def subset(self, indices) -> GroundTruthDataset:
        return GroundTruthDataset([self.items[i] for i in indices])

    def stratified(self, limit: int) -> GroundTruthDataset:
        """Evenly spaced items from each group, ``limit`` in total."""
        if limit >= len(self.items):
            return self
        by_group: dict[str, list[int]] = {}
        for i, it in enumerate(self.items):
            by_group.setdefault(it.group, []).append(i)
        groups = sorted(by_group)
        quota = {g: limit // len(groups) + (1 if k < limit % len(groups) else 0) for k, g in enumerate(groups)}
        chosen = []
        for g in groups:
            members = by_group[g]
            take = min(quota[g], len(members))
            chosen.extend(members[(j * len(members)) // take] for j in range(take))
        return self.subset(sorted(chosen))


def generate_seed_cfg(rng_seed: int, node_count: int, name: str | None = None) -> Cfg:
    """Connected CFG-like graph: a spine 0->1->...->n-1 plus ceil(n/2) extra edges.

    Extra edges are drawn uniformly among absent non-self-loop pairs that keep
    every in/out degree at most 3; drawing stops early only when no such pair
    is left.
    """
    if node_count < 2:
        raise ValueError("node_count must be >= 2")
    rng = random.Random(rng_seed)
    edges = {(i, i + 1) for i in range(node_count - 1)}
    outdeg = [1] * (node_count - 1) + [0]
    indeg = [0] + [1] * (node_count - 1)
    for _ in range(math.ceil(node_count / 2)):
        candidates = [
            (u, v)
            for u in range(node_count)
            for v in range(node_count)
            if u != v and (u, v) not in edges and outdeg[u] < MAX_DEGREE and indeg[v] < MAX_DEGREE
        ]
        if not candidates:
            break
        u, v = rng.choice(candidates)
        edges.add((u, v))
        outdeg[u] += 1
        indeg[v] += 1
    return Cfg(name if name is not None else f"seed{rng_seed}", frozenset(range(node_count)), frozenset(edges))


def enumerate_variants(seed: Cfg) -> list[Variant]:
    """The seed followed by every graph one legal edit away from it.

    Edits: add one isolated node, delete an isolated node, add an absent
    non-self-loop edge, delete an existing edge.
    """
    nodes = seed.sorted_nodes()
    out = [Variant("orig", seed)]
    new_node = nodes[-1] + 1 if nodes else 0
    out.append(Variant("addnode", Cfg(seed.name, seed.nodes | {new_node}, seed.edges)))
    for v in nodes:
        if not seed.successors[v] and not seed.predecessors[v]:
            out.append(Variant("delnode", Cfg(seed.name, seed.nodes - {v}, seed.edges)))
    for u in nodes:
        for v in nodes:
            if u != v and (u, v) not in seed.edges:
                out.append(Variant("addedge", Cfg(seed.name, seed.nodes, seed.edges | {(u, v)})))
    for e in seed.sorted_edges():
        out.append(Variant("deledge", Cfg(seed.name, seed.nodes, seed.edges - {e})))
    return out


def build_dataset(
    groups: int,
    node_count: int,
    rng_seed: int = 0,
    dedupe: bool = False,
    n: int = DEFAULT_N,
) -> GroundTruthDataset:
    """One seed CFG per group plus all of its single-edit variants.

    With ``dedupe`` a variant whose graph signature matches an earlier item of
    the same group is dropped.
    """
    master = random.Random(rng_seed)
    items: list[Item] = []
    for g in range(groups):
        group = f"seed{g:02d}"
        seed = generate_seed_cfg(master.getrandbits(64), node_count, name=group)
        seen = set()
        for index, (op, cfg) in enumerate(enumerate_variants(seed)):
            if dedupe:
                sig = extract_features(cfg, n)
                if sig in seen:
                    continue
                seen.add(sig)
            name = f"{group}_{op}_{index:04d}"
            items.append(Item(name, Cfg(name, cfg.nodes, cfg.edges), group))
    return GroundTruthDataset(items)


def write_dataset(ds: GroundTruthDataset, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for it in ds.items:
        (out / f"{it.name}.json").write_text(serialize_cfg(it.cfg, "json") + "\n", encoding="utf-8")
    with open(out / LABELS_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["filename", "group"])
        for it in ds.items:
            writer.writerow([f"{it.name}.json", it.group])


def read_dataset(in_dir) -> GroundTruthDataset:
    root = Path(in_dir)
    items = []
    with open(root / LABELS_FILE, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["filename", "group"]:
            raise ValueError(f"{root / LABELS_FILE}: expected header 'filename,group'")
        for row in reader:
            path = root / row["filename"]
            items.append(Item(Path(row["filename"]).stem, read_cfg(path), row["group"]))
    return GroundTruthDataset(items)
