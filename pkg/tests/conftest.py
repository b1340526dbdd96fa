from __future__ import annotations

import random

import pytest

from tah.cfg import FIG2_SAMPLE, Cfg

ACCEPTANCE_LINES: list[str] = []


def random_cfg(rng: random.Random, max_nodes: int = 12, p: float = 0.2, self_loops: bool = True) -> Cfg:
    n = rng.randint(1, max_nodes)
    edges = {
        (u, v)
        for u in range(n)
        for v in range(n)
        if (self_loops or u != v) and rng.random() < p
    }
    return Cfg(f"rand{n}", frozenset(range(n)), frozenset(edges))


@pytest.fixture
def fig2() -> Cfg:
    return FIG2_SAMPLE


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def valid_vocabulary(rng: random.Random, size: int, n: int = 5) -> list[str]:
    """Distinct valid feature keys of mixed lengths."""
    from tah.features import ALL_TYPES, canonical_key, is_valid_feature

    keys: set[str] = set()
    while len(keys) < size:
        k = rng.randint(1, n)
        feature = [rng.choice(ALL_TYPES) for _ in range(k)]
        if is_valid_feature(feature):
            keys.add(canonical_key(feature))
    return sorted(keys)


def random_signature_pair(rng: random.Random, vocab: list[str], n: int = 5):
    """Two sparse signatures whose overlap ranges from none to near-identical."""
    from tah.features import GraphSignature

    size = rng.randint(20, 120)
    a = {key: rng.randint(1, 6) for key in rng.sample(vocab, size)}
    keep = rng.random()
    b = {}
    for key, c in a.items():
        if rng.random() < keep:
            b[key] = max(1, c + rng.randint(-1, 1)) if rng.random() < 0.3 else c
    for key in rng.sample(vocab, rng.randint(0, size)):
        if key not in a and rng.random() > keep:
            b[key] = rng.randint(1, 6)
    if not b:
        b[rng.choice(vocab)] = 1
    return GraphSignature(n, a), GraphSignature(n, b)
