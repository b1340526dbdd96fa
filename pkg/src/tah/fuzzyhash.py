"""Fixed-size fuzzy hashes of graph signatures by random hyperplane projection.

Each projection bit is the sign of the dot product between the signature and
a Gaussian random vector.  The vectors are never materialized over the whole
feature space: the component for (feature key, bit) is derived on demand from
the seed, so only features actually present in a signature cost anything.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .features import DEFAULT_N, UINT32_MAX, GraphSignature
from .similarity import EmptySignatureError, ParameterMismatchError, rectification_from_totals

DEFAULT_BITS = 256
DEFAULT_SEED = 0x5441485F43464731  # b"TAH_CFG1"
HASH_PREFIX = "tah1:"
SEED_ENV = "TAH_SEED"

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GOLDEN = 0x9E3779B97F4A7C15


class HashDecodeError(ValueError):
    pass


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get(SEED_ENV)
    if not raw:
        return default
    return parse_seed(raw)


def parse_seed(text: str) -> int:
    """Parse a hex seed, with or without a ``0x`` prefix."""
    value = int(text, 16)
    if not 0 <= value <= _MASK64:
        raise ValueError(f"seed {text!r} does not fit in 64 bits")
    return value


@dataclass(frozen=True)
class ProjectionParams:
    k: int = DEFAULT_BITS
    seed: int = DEFAULT_SEED
    n: int = DEFAULT_N

    def __post_init__(self):
        if self.k < 1 or self.k % 8:
            raise ValueError(f"k must be a positive multiple of 8, got {self.k}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def splitmix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _splitmix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _unit_open(z: np.ndarray) -> np.ndarray:
    # top 53 bits, shifted off zero: strictly inside (0, 1)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / (1 << 53))


def _gaussian_cells(seed: int, feature_key: str, bit_indices: np.ndarray) -> np.ndarray:
    base = np.uint64(splitmix64(seed ^ splitmix64(fnv1a64(feature_key.encode("utf-8")))))
    idx = bit_indices.astype(np.uint64)
    u1 = _unit_open(_splitmix64_array(base + (np.uint64(2) * idx + np.uint64(1)) * np.uint64(_GOLDEN)))
    u2 = _unit_open(_splitmix64_array(base + (np.uint64(2) * idx + np.uint64(2)) * np.uint64(_GOLDEN)))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def gaussian_component(seed: int, feature_key: str, bit_index: int) -> float:
    """Standard-normal deviate for one (feature, projection bit) cell.

    Two uniforms come from a SplitMix64 finalizer over the seed, the FNV-1a
    hash of the key and the bit index; Box-Muller turns them into a normal.
    """
    return float(_gaussian_cells(seed, feature_key, np.array([bit_index]))[0])


@lru_cache(maxsize=1 << 16)
def _projection_row(seed: int, feature_key: str, k: int) -> np.ndarray:
    row = _gaussian_cells(seed, feature_key, np.arange(k))
    row.setflags(write=False)
    return row


@dataclass(frozen=True)
class FuzzyHash:
    """``k`` projection bits packed MSB-first, plus the signature's feature total."""

    bits: bytes
    total: int
    params: ProjectionParams = ProjectionParams()

    def __post_init__(self):
        if len(self.bits) * 8 != self.params.k:
            raise ValueError(f"expected {self.params.k} bits, got {len(self.bits) * 8}")
        if not 0 < self.total <= UINT32_MAX:
            raise ValueError("total must be a positive 32-bit value")

    @classmethod
    def from_bit_array(cls, bits, total: int, params: ProjectionParams = ProjectionParams()) -> FuzzyHash:
        arr = np.asarray(bits, dtype=bool)
        return cls(np.packbits(arr).tobytes(), total, params)

    def bit_array(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8)).astype(bool)

    def bit(self, i: int) -> int:
        return (self.bits[i // 8] >> (7 - i % 8)) & 1

    def __str__(self) -> str:
        return encode_hash(self)


def projection_dots(sig: GraphSignature, params: ProjectionParams) -> np.ndarray:
    """Dot products of ``sig`` with each of the ``k`` random vectors."""
    acc = np.zeros(params.k, dtype=np.float64)
    for key, count in sig.counts.items():
        acc += count * _projection_row(params.seed, key, params.k)
    return acc


def project(sig: GraphSignature, params: ProjectionParams = ProjectionParams()) -> FuzzyHash:
    if sig.total == 0:
        raise EmptySignatureError("cannot hash an empty signature")
    if sig.n != params.n:
        raise ParameterMismatchError(f"signature built with n={sig.n}, params expect n={params.n}")
    return FuzzyHash.from_bit_array(projection_dots(sig, params) >= 0.0, sig.total, params)


def _check_params(a: FuzzyHash, b: FuzzyHash) -> None:
    if a.params != b.params:
        raise ParameterMismatchError(f"hash parameters differ: {a.params} vs {b.params}")


def hamming_similarity(a: FuzzyHash, b: FuzzyHash) -> float:
    _check_params(a, b)
    diff = (int.from_bytes(a.bits, "big") ^ int.from_bytes(b.bits, "big")).bit_count()
    return 1.0 - diff / a.params.k


def cosine_from_hamming(h: float) -> float:
    return min(1.0, max(0.0, 2.0 * h - 1.0))


def estimate_cosine(a: FuzzyHash, b: FuzzyHash) -> float:
    return cosine_from_hamming(hamming_similarity(a, b))


def hash_similarity(a: FuzzyHash, b: FuzzyHash) -> float:
    return rectification_from_totals(a.total, b.total) * estimate_cosine(a, b)


def hash_distance(a: FuzzyHash, b: FuzzyHash) -> float:
    return 1.0 - hash_similarity(a, b)


def encode_hash(h: FuzzyHash) -> str:
    return f"{HASH_PREFIX}{h.total:08x}{h.bits.hex()}"


_HEX = re.compile(r"[0-9a-fA-F]*")


def decode_hash(text: str, params: ProjectionParams | None = None) -> FuzzyHash:
    """Inverse of :func:`encode_hash`.

    The text carries only the total and the bits, so seed and n come from
    ``params`` (defaults when omitted); k is taken from the digit count.
    """
    text = text.strip()
    tag, sep, body = text.partition(":")
    if not sep or tag + ":" != HASH_PREFIX:
        raise HashDecodeError(f"unsupported hash version tag {tag!r}")
    if not _HEX.fullmatch(body):
        raise HashDecodeError("hash body contains non-hex characters")
    if len(body) < 8 + 2 or (len(body) - 8) % 2:
        raise HashDecodeError(f"hash body has invalid length {len(body)}")
    total = int(body[:8], 16)
    bits = bytes.fromhex(body[8:])
    k = len(bits) * 8
    if params is None:
        params = ProjectionParams(k=k)
    elif params.k != k:
        raise HashDecodeError(f"hash has {k} bits, expected {params.k}")
    if total == 0:
        raise HashDecodeError("hash total must be positive")
    return FuzzyHash(bits, total, params)
