"""Topology-aware hashing (TAH) for control flow graph similarity."""

__version__ = "0.1.0"

from .baseline import McsResult, enumerate_walks_oracle, mcs_similarity, mcs_size
from .cfg import Cfg, DegreePair, degrees, parse_cfg, read_cfg, serialize_cfg
from .features import (
    GraphSignature,
    NodeType,
    abstract_node,
    canonical_key,
    decode_key,
    extract_features,
    feature_space_size,
    is_valid_feature,
)
from .fuzzyhash import (
    FuzzyHash,
    ProjectionParams,
    decode_hash,
    encode_hash,
    estimate_cosine,
    gaussian_component,
    hamming_similarity,
    hash_similarity,
    project,
)
from .similarity import cosine, exact_distance, exact_similarity, rectification

__all__ = [
    "Cfg", "DegreePair", "degrees", "parse_cfg", "read_cfg", "serialize_cfg",
    "GraphSignature", "NodeType", "abstract_node", "canonical_key", "decode_key",
    "extract_features", "feature_space_size", "is_valid_feature",
    "cosine", "rectification", "exact_similarity", "exact_distance",
    "FuzzyHash", "ProjectionParams", "gaussian_component", "project", "hamming_similarity",
    "estimate_cosine", "hash_similarity", "encode_hash", "decode_hash",
    "McsResult", "mcs_size", "mcs_similarity", "enumerate_walks_oracle",
]
