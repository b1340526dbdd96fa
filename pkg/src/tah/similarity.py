"""Exact graph-signature similarity: cosine scaled by a size rectification factor."""

from __future__ import annotations

import math

from .features import GraphSignature


class EmptySignatureError(ValueError):
    pass


class ParameterMismatchError(ValueError):
    pass


def _require_nonempty(*sigs: GraphSignature) -> None:
    for s in sigs:
        if s.total == 0:
            raise EmptySignatureError("signature has no features (empty graph?)")


def _cosine_from_parts(dot: float, sq_a: float, sq_b: float) -> float:
    # sqrt(x*x) == x exactly, so equal norms take the direct quotient; this keeps
    # identical signatures at exactly 1.0.
    if sq_a == sq_b:
        value = dot / sq_a
    else:
        value = dot / math.sqrt(sq_a * sq_b)
    return min(1.0, max(0.0, value))


def cosine(a: GraphSignature, b: GraphSignature) -> float:
    _require_nonempty(a, b)
    small, large = (a.counts, b.counts) if len(a.counts) <= len(b.counts) else (b.counts, a.counts)
    dot = sum(c * large[k] for k, c in small.items() if k in large)
    sq_a = sum(c * c for c in a.counts.values())
    sq_b = sum(c * c for c in b.counts.values())
    return _cosine_from_parts(float(dot), float(sq_a), float(sq_b))


def rectification_from_totals(total_a: int, total_b: int) -> float:
    if total_a <= 0 or total_b <= 0:
        raise EmptySignatureError("rectification needs positive feature totals")
    return min(total_a, total_b) / max(total_a, total_b)


def rectification(a: GraphSignature, b: GraphSignature) -> float:
    _require_nonempty(a, b)
    return rectification_from_totals(a.total, b.total)


def exact_similarity(a: GraphSignature, b: GraphSignature) -> float:
    if a.n != b.n:
        raise ParameterMismatchError(f"signatures built with n={a.n} and n={b.n}")
    return rectification(a, b) * cosine(a, b)


def exact_distance(a: GraphSignature, b: GraphSignature) -> float:
    return 1.0 - exact_similarity(a, b)
