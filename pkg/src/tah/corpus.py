"""Append-only JSONL store of named fuzzy hashes for triage scans."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .fuzzyhash import FuzzyHash, HashDecodeError, ProjectionParams, decode_hash, encode_hash, hash_similarity


class CorpusError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DuplicateIdError(CorpusError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    hash: FuzzyHash
    added_at: int

    def to_json(self) -> str:
        return json.dumps({"id": self.id, "hash": encode_hash(self.hash), "added_at": self.added_at})


def load_corpus(path, params: ProjectionParams | None = None) -> list[CorpusEntry]:
    path = Path(path)
    if not path.exists():
        return []
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                entry = CorpusEntry(str(rec["id"]), decode_hash(rec["hash"], params), int(rec["added_at"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, HashDecodeError) as exc:
                raise CorpusError(f"corrupt record: {exc}", lineno) from None
            if entry.id in seen:
                raise CorpusError(f"duplicate id {entry.id!r}", lineno)
            seen.add(entry.id)
            entries.append(entry)
    return entries


def add_entry(path, entry_id: str, h: FuzzyHash, now: int | None = None) -> CorpusEntry:
    """Append one record; existing lines are never rewritten."""
    existing = load_corpus(path, h.params)
    if any(e.id == entry_id for e in existing):
        raise DuplicateIdError(f"id {entry_id!r} already present")
    entry = CorpusEntry(entry_id, h, int(time.time()) if now is None else now)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(entry.to_json() + "\n")
    return entry


def scan(entries: list[CorpusEntry], query: FuzzyHash, threshold: float) -> list[tuple[float, CorpusEntry]]:
    """Entries with similarity >= ``threshold``, best first, ties by id."""
    hits = [(hash_similarity(query, e.hash), e) for e in entries]
    hits = [(s, e) for s, e in hits if s >= threshold]
    hits.sort(key=lambda pair: (-pair[0], pair[1].id))
    return hits
