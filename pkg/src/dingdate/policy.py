"""Dating decision rules and reference-artifact retrieval.

Top-4 period presentation with a reject gate on the top-1 probability,
plus an exact cosine-similarity index over encoder embeddings. At
catalog scale (thousands of items) brute-force exact search is
instantaneous, so no approximate structure is used.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from dingdate.periods import PERIODS, Period

OTHER_STUFFS_THRESHOLD = 0.05
REFERENCE_K = 5

# Probabilities may be sub-normalized (mass below 1 reads as "none of
# the 11 classes"), which is the only way the reject gate can fire:
# a fully normalized 11-way distribution always has max >= 1/11.
_SUM_TOLERANCE = 1e-4


class Outcome(enum.Enum):
    DATED = "dated"
    OTHER_STUFFS = "other_stuffs"


class InvalidDistributionError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class ZeroVectorError(ValueError):
    pass


class DuplicateIdError(ValueError):
    pass


@dataclass(frozen=True)
class DatingDecision:
    """Either a ranked top-4 of periods or the reject outcome."""

    outcome: Outcome
    ranked: tuple[tuple[Period, float], ...]
    top1_probability: float


@dataclass(frozen=True)
class ReferenceHit:
    artifact_id: str
    similarity: float


def decide(
    probabilities: Sequence[float],
    other_stuffs_threshold: float = OTHER_STUFFS_THRESHOLD,
) -> DatingDecision:
    """Apply the reject gate and rank the top four periods.

    If the maximum probability is strictly below the threshold the
    outcome is the reject class with an empty ranking (the top-1 value
    is still reported). Otherwise the four highest-probability periods
    are returned, ties broken chronologically earliest first.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.shape != (len(PERIODS),):
        raise InvalidDistributionError(
            f"expected {len(PERIODS)} probabilities, got shape {probs.shape}"
        )
    if not np.isfinite(probs).all():
        raise InvalidDistributionError("probabilities must be finite")
    if (probs < 0).any():
        raise InvalidDistributionError("probabilities must be non-negative")
    total = float(probs.sum())
    if total > 1.0 + _SUM_TOLERANCE:
        raise InvalidDistributionError(f"probabilities sum to {total} > 1")
    if total == 0.0:
        raise InvalidDistributionError("probabilities sum to zero")

    top1 = float(probs.max())
    if top1 < other_stuffs_threshold:
        return DatingDecision(
            outcome=Outcome.OTHER_STUFFS, ranked=(), top1_probability=top1
        )
    order = sorted(range(len(PERIODS)), key=lambda i: (-probs[i], i))
    ranked = tuple((PERIODS[i], float(probs[i])) for i in order[:4])
    return DatingDecision(outcome=Outcome.DATED, ranked=ranked, top1_probability=top1)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """dot(a, b) / (|a| |b|), clamped into [-1, 1].

    Each vector is pre-scaled by its largest component so extreme
    magnitudes neither overflow nor underflow the norm.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionMismatchError(f"shapes differ: {va.shape} vs {vb.shape}")
    ma = float(np.abs(va).max(initial=0.0))
    mb = float(np.abs(vb).max(initial=0.0))
    if ma == 0.0 or mb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for a zero vector")
    ua, ub = va / ma, vb / mb
    na = float(np.linalg.norm(ua))
    nb = float(np.linalg.norm(ub))
    return float(np.clip(float(ua @ ub) / (na * nb), -1.0, 1.0))


@dataclass
class EmbeddingIndex:
    """Exact cosine index; contents are canonicalized by id at build time."""

    dim: int
    ids: tuple[str, ...]
    matrix: np.ndarray  # (count, dim) float32, rows ordered like ids
    metric: str = "cosine"
    _unit_rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
        self._unit_rows = self.matrix.astype(np.float64) / norms[:, None] if len(
            self.ids
        ) else np.zeros((0, self.dim))

    def __len__(self) -> int:
        return len(self.ids)

    def query(self, embedding: Sequence[float], k: int = REFERENCE_K) -> list[ReferenceHit]:
        """Exact top-k by cosine similarity, ties broken by id ascending."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(embedding, dtype=np.float64).ravel()
        if q.shape != (self.dim,):
            raise DimensionMismatchError(
                f"query has dimension {q.shape}, index has {self.dim}"
            )
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            raise ZeroVectorError("cannot query with a zero vector")
        if not self.ids:
            return []
        sims = self._unit_rows @ (q / qn)
        sims = np.clip(sims, -1.0, 1.0)
        order = sorted(range(len(self.ids)), key=lambda i: (-sims[i], self.ids[i]))
        return [
            ReferenceHit(artifact_id=self.ids[i], similarity=float(sims[i]))
            for i in order[:k]
        ]

    def save(self, path: str | Path) -> None:
        """Sidecar binary: u32 dim | u32 count | per item u16 id length,
        id UTF-8, raw float32 little-endian vector."""
        with Path(path).open("wb") as fh:
            fh.write(struct.pack("<II", self.dim, len(self.ids)))
            for i, item_id in enumerate(self.ids):
                encoded = item_id.encode("utf-8")
                fh.write(struct.pack("<H", len(encoded)))
                fh.write(encoded)
                fh.write(np.ascontiguousarray(self.matrix[i], dtype="<f4").tobytes())


def build_index(pairs: Iterable[tuple[str, Sequence[float]]]) -> EmbeddingIndex:
    """Build an exact index; query results never depend on input order."""
    items = [(str(item_id), np.asarray(vec, dtype=np.float32).ravel()) for item_id, vec in pairs]
    seen: set[str] = set()
    for item_id, _ in items:
        if item_id in seen:
            raise DuplicateIdError(f"duplicate artifact id: {item_id}")
        seen.add(item_id)
    if not items:
        return EmbeddingIndex(dim=0, ids=(), matrix=np.zeros((0, 0), dtype=np.float32))
    dim = items[0][1].shape[0]
    for item_id, vec in items:
        if vec.shape != (dim,):
            raise DimensionMismatchError(
                f"vector for {item_id} has dimension {vec.shape[0]}, expected {dim}"
            )
        if not np.isfinite(vec).all():
            raise ValueError(f"vector for {item_id} contains non-finite values")
        if not vec.any():
            raise ZeroVectorError(f"vector for {item_id} is all-zero")
    items.sort(key=lambda pair: pair[0])
    matrix = np.stack([vec for _, vec in items])
    return EmbeddingIndex(dim=dim, ids=tuple(item_id for item_id, _ in items), matrix=matrix)


def load_index(path: str | Path) -> EmbeddingIndex:
    """Read the sidecar binary written by EmbeddingIndex.save."""
    data = Path(path).read_bytes()
    offset = 8
    if len(data) < offset:
        raise ValueError(f"{path} is not an index sidecar")
    dim, count = struct.unpack_from("<II", data, 0)
    pairs: list[tuple[str, np.ndarray]] = []
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        item_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        pairs.append((item_id, vec))
    if offset != len(data):
        raise ValueError("trailing bytes in index sidecar")
    index = build_index(pairs)
    if index.dim not in (dim, 0):
        raise DimensionMismatchError("sidecar dimension header mismatch")
    if count == 0:
        return EmbeddingIndex(dim=dim, ids=(), matrix=np.zeros((0, dim), dtype=np.float32))
    return index


def query_references(
    index: EmbeddingIndex, embedding: Sequence[float], k: int = REFERENCE_K
) -> list[ReferenceHit]:
    """Top-k most similar catalogued artifacts for an embedding."""
    return index.query(embedding, k)
