"""In-context demonstration store with exact cosine-similarity retrieval.

Deliberately tiny: the corpus is desk-scale (tens of entries), so retrieval
is an exact scan.  The default embedder is a deterministic character
n-gram hasher, so tests and replays never need a network.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

STORE_HEADER = "dkg-demo-store v1"
DEFAULT_DIMENSION = 256


class EmbedderUnavailable(Exception):
    """Raised when a remote embedding backend cannot be reached."""


def ngram_embed(text: str, dimension: int = DEFAULT_DIMENSION, n: int = 3) -> np.ndarray:
    """Deterministic fallback embedder: hash character n-grams into buckets,
    then L2-normalize."""
    if not text:
        raise ValueError("cannot embed empty text")
    vec = np.zeros(dimension, dtype=np.float64)
    padded = f" {text.lower()} "
    for i in range(max(len(padded) - n + 1, 1)):
        gram = padded[i:i + n]
        digest = hashlib.md5(gram.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "little") % dimension
        vec[bucket] += 1.0
    return vec / np.linalg.norm(vec)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


@dataclass(frozen=True)
class Demonstration:
    """One in-context example: a task description plus the exemplar output
    for a specific pipeline stage."""

    id: str
    stage: str
    task_text: str
    payload: str
    embedding: np.ndarray = field(compare=False)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "stage": self.stage,
            "task_text": self.task_text,
            "payload": self.payload,
            "embedding": base64.b64encode(
                self.embedding.astype(np.float32).tobytes()).decode("ascii"),
        }

    @classmethod
    def from_record(cls, record: dict) -> Demonstration:
        raw = base64.b64decode(record["embedding"])
        embedding = np.frombuffer(raw, dtype=np.float32).astype(np.float64)
        return cls(record["id"], record["stage"], record["task_text"],
                   record["payload"], embedding)


class DemoStore:
    """Append-only demonstration store; all entries share one dimension."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION, embedder: str = "ngram"):
        self.dimension = dimension
        self.embedder = embedder
        self.entries: list[Demonstration] = []

    def embed(self, text: str) -> np.ndarray:
        if self.embedder != "ngram":
            raise EmbedderUnavailable(
                f"embedder {self.embedder!r} has no local backend configured")
        return ngram_embed(text, self.dimension)

    def add(self, id: str, stage: str, task_text: str, payload: str,
            embedding: np.ndarray | None = None) -> Demonstration:
        if embedding is None:
            embedding = self.embed(task_text)
        if embedding.shape != (self.dimension,):
            raise ValueError(
                f"embedding dimension {embedding.shape} != store dimension {self.dimension}")
        demo = Demonstration(id, stage, task_text, payload, embedding)
        self.entries.append(demo)
        return demo

    def top_k(self, query: np.ndarray, k: int, stage: str) -> list[Demonstration]:
        """The k stage-matching entries most cosine-similar to the query,
        descending; ties break by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if query.shape != (self.dimension,):
            raise ValueError("query dimension does not match the store")
        matching = [d for d in self.entries if d.stage == stage]
        ranked = sorted(matching, key=lambda d: (-cosine(query, d.embedding), d.id))
        return ranked[:k]

    def save(self, path: str | Path) -> None:
        lines = [STORE_HEADER + f" dim={self.dimension} embedder={self.embedder}"]
        lines += [json.dumps(d.to_record(), sort_keys=True) for d in self.entries]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> DemoStore:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith(STORE_HEADER):
            raise ValueError(f"{path}: not a demo store file (bad header)")
        fields = dict(part.split("=", 1) for part in lines[0].split()[2:])
        store = cls(dimension=int(fields["dim"]), embedder=fields.get("embedder", "ngram"))
        for line in lines[1:]:
            if line.strip():
                store.entries.append(Demonstration.from_record(json.loads(line)))
        return store
