"""Persistent store of annotated reference artifacts.

Single-directory layout: one line-delimited manifest plus
content-addressed image blobs, inspectable and diff-friendly.

    <root>/manifest.tsv      one record per line, tab-separated
    <root>/blobs/<hash>.png  image bytes named by content hash
    <root>/embeddings/*.f32  raw float32 little-endian vectors
    <root>/boxes/<id>.json   expert-annotated ground-truth boxes

Records are immutable after registration; an update is a re-registration
under a new id. The embedding is derived data and may be backfilled
later by the ingest pass without touching the annotation fields.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dingdate.detect import DetectionBox, PartLabel
from dingdate.imageproc import sniff_format
from dingdate.periods import InvalidPeriodError, Period

MANIFEST_NAME = "manifest.tsv"
MANIFEST_HEADER = "# ding-catalog v1"
MANIFEST_VERSION = 1

ANNOTATION_FIELDS = ("shape", "literature", "excavation", "museum")


class DuplicateIdError(ValueError):
    pass


class NotFoundError(KeyError):
    pass


class InvalidRecordError(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"invalid record field {field_name}: {reason}")
        self.field_name = field_name


class ManifestParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"manifest line {line_no}: {reason}")
        self.line_no = line_no


class CatalogIOError(OSError):
    pass


@dataclass(frozen=True, eq=False)
class ArtifactRecord:
    """One catalogued Ding with its expert annotations."""

    id: str
    period: Period
    shape: str
    literature: str
    excavation: str
    museum: str
    image_ref: str
    embedding: np.ndarray | None = None
    feature_boxes: tuple[DetectionBox, ...] = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArtifactRecord):
            return NotImplemented
        if (self.id, self.period, self.shape, self.literature, self.excavation,
                self.museum, self.image_ref, self.feature_boxes) != (
                other.id, other.period, other.shape, other.literature,
                other.excavation, other.museum, other.image_ref,
                other.feature_boxes):
            return False
        if (self.embedding is None) != (other.embedding is None):
            return False
        if self.embedding is None:
            return True
        return np.array_equal(self.embedding, other.embedding)


def validate_record(record: ArtifactRecord) -> None:
    """Raise InvalidRecordError naming the first offending field."""
    if not isinstance(record.id, str) or not record.id:
        raise InvalidRecordError("id", "must be a nonempty string")
    if any(ch in record.id for ch in "\t\n\r"):
        raise InvalidRecordError("id", "must not contain tabs or newlines")
    if not isinstance(record.period, Period):
        raise InvalidRecordError("period", "must be a Period")
    for name in ANNOTATION_FIELDS:
        value = getattr(record, name)
        if not isinstance(value, str):
            raise InvalidRecordError(name, "must be present as a string")
    if not isinstance(record.image_ref, str) or not record.image_ref:
        raise InvalidRecordError("image_ref", "must be a nonempty string")
    if record.embedding is not None:
        emb = np.asarray(record.embedding)
        if emb.ndim != 1 or emb.size == 0:
            raise InvalidRecordError("embedding", "must be a nonempty vector")
        if not np.isfinite(emb).all():
            raise InvalidRecordError("embedding", "must be finite")


@dataclass(frozen=True)
class ManifestEntry:
    """One serialized manifest row; embedding carried as a ref."""

    id: str
    period: Period
    shape: str
    literature: str
    excavation: str
    museum: str
    image_ref: str
    embedding_ref: str | None = None


@dataclass(frozen=True)
class CatalogManifest:
    version: int
    entries: tuple[ManifestEntry, ...]


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n", "\\r": "\r"}


def _escape_field(value: str) -> str:
    out = []
    for ch in value:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def _unescape_field(value: str, line_no: int) -> str:
    out = []
    i = 0
    while i < len(value):
        if value[i] == "\\":
            pair = value[i : i + 2]
            if pair not in _UNESCAPES:
                raise ManifestParseError(line_no, f"bad escape {pair!r}")
            out.append(_UNESCAPES[pair])
            i += 2
        else:
            out.append(value[i])
            i += 1
    return "".join(out)


def render_manifest_text(manifest: CatalogManifest) -> str:
    """Serialize to the line-delimited tab-separated form."""
    lines = [MANIFEST_HEADER]
    for entry in manifest.entries:
        fields = [
            entry.id,
            str(entry.period),
            entry.shape,
            entry.literature,
            entry.excavation,
            entry.museum,
            entry.image_ref,
        ]
        if entry.embedding_ref is not None:
            fields.append(entry.embedding_ref)
        lines.append("\t".join(_escape_field(f) for f in fields))
    return "\n".join(lines) + "\n"


def parse_manifest_text(text: str) -> CatalogManifest:
    """Parse manifest text; malformed lines raise with their line number."""
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    # the format is \n-delimited; other control characters are field data
    lines = text.split("\n")
    start = 0
    if lines and lines[0].startswith("#"):
        if lines[0].strip() != MANIFEST_HEADER:
            raise ManifestParseError(1, f"unsupported header {lines[0]!r}")
        start = 1
    for line_no, line in enumerate(lines[start:], start=start + 1):
        if not line:
            continue
        raw_fields = line.split("\t")
        if len(raw_fields) not in (7, 8):
            raise ManifestParseError(
                line_no, f"expected 7 or 8 fields, got {len(raw_fields)}"
            )
        fields = [_unescape_field(f, line_no) for f in raw_fields]
        try:
            period = Period.parse(fields[1])
        except InvalidPeriodError as exc:
            raise ManifestParseError(line_no, str(exc)) from None
        if not fields[0]:
            raise ManifestParseError(line_no, "empty id")
        if fields[0] in seen:
            raise ManifestParseError(line_no, f"duplicate id {fields[0]!r}")
        seen.add(fields[0])
        if not fields[6]:
            raise ManifestParseError(line_no, "empty image_ref")
        entries.append(
            ManifestEntry(
                id=fields[0],
                period=period,
                shape=fields[2],
                literature=fields[3],
                excavation=fields[4],
                museum=fields[5],
                image_ref=fields[6],
                embedding_ref=fields[7] if len(fields) == 8 else None,
            )
        )
    return CatalogManifest(version=MANIFEST_VERSION, entries=tuple(entries))


_BOX_KEYS = ("label", "score", "box")


def _boxes_to_json(boxes: tuple[DetectionBox, ...]) -> str:
    return json.dumps(
        [
            {"label": b.label.value, "score": b.score, "box": [b.x0, b.y0, b.x1, b.y1]}
            for b in boxes
        ],
        ensure_ascii=False,
    )


def _boxes_from_json(text: str) -> tuple[DetectionBox, ...]:
    items = json.loads(text)
    boxes = []
    for item in items:
        x0, y0, x1, y1 = item["box"]
        boxes.append(
            DetectionBox(
                label=PartLabel(item["label"]),
                score=float(item["score"]),
                x0=x0, y0=y0, x1=x1, y1=y1,
            )
        )
    return tuple(boxes)


class CatalogStore:
    """Directory-backed artifact catalog.

    Concurrent reads are safe; writes are serialized by an internal
    lock (single-writer contract).
    """

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._records: dict[str, ArtifactRecord] = {}
        if create:
            for sub in ("blobs", "embeddings", "boxes"):
                (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._load_existing()

    # -- blobs ---------------------------------------------------------

    def put_image(self, data: bytes) -> str:
        """Store image bytes under their content hash; returns the ref."""
        fmt = sniff_format(data)
        if fmt is None:
            raise InvalidRecordError("image_ref", "image bytes are not JPEG or PNG")
        ext = "jpg" if fmt == "jpeg" else "png"
        ref = f"{hashlib.sha256(data).hexdigest()}.{ext}"
        blob_path = self.root / "blobs" / ref
        if not blob_path.exists():
            with self._lock:
                tmp = blob_path.with_suffix(blob_path.suffix + ".tmp")
                tmp.write_bytes(data)
                tmp.replace(blob_path)
        return ref

    def open_image(self, ref: str) -> bytes:
        blob_path = self.root / "blobs" / ref
        if "/" in ref or "\\" in ref or not blob_path.is_file():
            raise NotFoundError(ref)
        return blob_path.read_bytes()

    def has_image(self, ref: str) -> bool:
        return "/" not in ref and "\\" not in ref and (self.root / "blobs" / ref).is_file()

    # -- records -------------------------------------------------------

    def register_artifact(self, record: ArtifactRecord) -> str:
        """Durably store a new record; returns its id."""
        validate_record(record)
        if not self.has_image(record.image_ref):
            raise InvalidRecordError(
                "image_ref", f"{record.image_ref} does not resolve to a stored image"
            )
        with self._lock:
            if record.id in self._records:
                raise DuplicateIdError(f"id already registered: {record.id}")
            embedding = None
            if record.embedding is not None:
                embedding = np.ascontiguousarray(record.embedding, dtype=np.float32)
                self._write_embedding(record.id, embedding)
            if record.feature_boxes:
                boxes_path = self.root / "boxes" / f"{record.id}.json"
                boxes_path.write_text(
                    _boxes_to_json(record.feature_boxes), encoding="utf-8"
                )
            stored = ArtifactRecord(
                id=record.id,
                period=record.period,
                shape=record.shape,
                literature=record.literature,
                excavation=record.excavation,
                museum=record.museum,
                image_ref=record.image_ref,
                embedding=embedding,
                feature_boxes=record.feature_boxes,
            )
            self._records[record.id] = stored
            self._rewrite_manifest()
        return record.id

    def get_artifact(self, artifact_id: str) -> ArtifactRecord:
        record = self._records.get(artifact_id)
        if record is None:
            raise NotFoundError(artifact_id)
        return record

    def list_by_period(self, period: Period) -> list[str]:
        """All ids with the given period, ascending."""
        if not isinstance(period, Period):
            raise InvalidRecordError("period", "must be a Period")
        return sorted(r.id for r in self._records.values() if r.period == period)

    def backfill_embedding(self, artifact_id: str, embedding: np.ndarray) -> None:
        """Attach a computed embedding to an existing record (ingest pass)."""
        with self._lock:
            record = self._records.get(artifact_id)
            if record is None:
                raise NotFoundError(artifact_id)
            emb = np.ascontiguousarray(embedding, dtype=np.float32)
            self._write_embedding(artifact_id, emb)
            self._records[artifact_id] = ArtifactRecord(
                id=record.id,
                period=record.period,
                shape=record.shape,
                literature=record.literature,
                excavation=record.excavation,
                museum=record.museum,
                image_ref=record.image_ref,
                embedding=emb,
                feature_boxes=record.feature_boxes,
            )
            self._rewrite_manifest()

    def records(self) -> list[ArtifactRecord]:
        return [self._records[k] for k in sorted(self._records)]

    def __len__(self) -> int:
        return len(self._records)

    def embedding_pairs(self) -> list[tuple[str, np.ndarray]]:
        """(id, embedding) for every record that has one."""
        return [
            (r.id, r.embedding)
            for r in self.records()
            if r.embedding is not None
        ]

    # -- persistence ---------------------------------------------------

    def _embedding_ref(self, artifact_id: str) -> str:
        return f"embeddings/{artifact_id}.f32"

    def _write_embedding(self, artifact_id: str, embedding: np.ndarray) -> None:
        path = self.root / self._embedding_ref(artifact_id)
        path.write_bytes(embedding.astype("<f4").tobytes())

    def _read_embedding(self, ref: str, line_no: int) -> np.ndarray:
        path = self.root / ref
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise CatalogIOError(f"embedding blob {ref} unreadable: {exc}") from exc
        if len(raw) % 4:
            raise ManifestParseError(line_no, f"embedding blob {ref} has odd length")
        return np.frombuffer(raw, dtype="<f4").copy()

    def _manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def _rewrite_manifest(self) -> None:
        entries = tuple(
            ManifestEntry(
                id=r.id,
                period=r.period,
                shape=r.shape,
                literature=r.literature,
                excavation=r.excavation,
                museum=r.museum,
                image_ref=r.image_ref,
                embedding_ref=(
                    self._embedding_ref(r.id) if r.embedding is not None else None
                ),
            )
            for r in self.records()
        )
        text = render_manifest_text(CatalogManifest(MANIFEST_VERSION, entries))
        tmp = self._manifest_path().with_suffix(".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(self._manifest_path())

    def _load_existing(self) -> None:
        path = self._manifest_path()
        if not path.is_file():
            return
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CatalogIOError(f"cannot read {path}: {exc}") from exc
        manifest = parse_manifest_text(text)
        for line_no, entry in enumerate(manifest.entries, start=2):
            embedding = None
            if entry.embedding_ref is not None:
                embedding = self._read_embedding(entry.embedding_ref, line_no)
            boxes_path = self.root / "boxes" / f"{entry.id}.json"
            boxes = ()
            if boxes_path.is_file():
                boxes = _boxes_from_json(boxes_path.read_text(encoding="utf-8"))
            self._records[entry.id] = ArtifactRecord(
                id=entry.id,
                period=entry.period,
                shape=entry.shape,
                literature=entry.literature,
                excavation=entry.excavation,
                museum=entry.museum,
                image_ref=entry.image_ref,
                embedding=embedding,
                feature_boxes=boxes,
            )


def load_manifest(path: str | Path) -> CatalogStore:
    """Open the catalog rooted at the manifest's directory."""
    path = Path(path)
    if not path.is_file():
        raise CatalogIOError(f"manifest not found: {path}")
    return CatalogStore(path.parent, create=False)
