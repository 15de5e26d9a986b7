"""Pluggable feature-part detector with box postprocessing.

Backends return raw, possibly garbage proposals; `postprocess` repairs or
rejects them so downstream code only ever sees valid normalized boxes.
The real detection network runs behind the remote backend's wire
contract and is not part of this package.
"""

from __future__ import annotations

import enum
import json
import math
import threading
from dataclasses import dataclass
from typing import Protocol

import httpx

from dingdate.imageproc import Image, encode_png


class PartLabel(enum.Enum):
    HANDLE = "handle"
    LEG = "leg"
    DECORATION = "decoration"
    LID = "lid"
    BODY = "body"
    OTHER = "other"


class BackendUnavailableError(RuntimeError):
    """Remote backend refused, timed out, or returned a server error."""


class BackendProtocolError(RuntimeError):
    """Remote backend answered with a malformed payload."""


@dataclass(frozen=True)
class DetectionBox:
    """Validated feature-part box in normalized image coordinates."""

    label: PartLabel
    score: float
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x0 < self.x1 <= 1.0):
            raise ValueError(f"invalid x extent: [{self.x0}, {self.x1}]")
        if not (0.0 <= self.y0 < self.y1 <= 1.0):
            raise ValueError(f"invalid y extent: [{self.y0}, {self.y1}]")
        if not (0.0 <= self.score <= 1.0) or math.isnan(self.score):
            raise ValueError(f"score out of range: {self.score}")


@dataclass(frozen=True)
class RawBox:
    """Unvalidated backend proposal; postprocess repairs or drops it."""

    label: str
    score: float
    x0: float
    y0: float
    x1: float
    y1: float


@dataclass(frozen=True)
class OverlayRect:
    """Pixel-space rectangle with its caption data."""

    label: PartLabel
    score: float
    x0: int
    y0: int
    x1: int
    y1: int


class DetectorBackend(Protocol):
    descriptor: str

    def detect(self, image: Image) -> list[RawBox]: ...


class StubDetector:
    """Deterministic three-box detector derived from image dimensions.

    Stands in for the remote detection model in tests and demos: one
    handle, one leg, one decoration, at fixed relative positions.
    """

    descriptor = "stub"

    def detect(self, image: Image) -> list[RawBox]:
        del image  # boxes depend only on having an image at all
        return [
            RawBox("handle", 0.95, 0.30, 0.05, 0.70, 0.20),
            RawBox("leg", 0.90, 0.20, 0.70, 0.45, 0.98),
            RawBox("decoration", 0.85, 0.25, 0.30, 0.75, 0.60),
        ]


class RemoteDetector:
    """HTTP client for an external detection service.

    Request: the image posted as PNG binary. Response: JSON document
    {"detections": [{"label": str, "score": num, "box": [x0,y0,x1,y1]}]}
    with normalized coordinates.
    """

    def __init__(self, url: str, timeout_ms: int = 2000, max_concurrency: int = 4):
        self.url = url
        self.timeout_ms = timeout_ms
        self.descriptor = f"remote:{url}"
        self._slots = threading.BoundedSemaphore(max_concurrency)

    def detect(self, image: Image) -> list[RawBox]:
        payload = encode_png(image)
        with self._slots:
            try:
                response = httpx.post(
                    self.url,
                    content=payload,
                    headers={"content-type": "image/png"},
                    timeout=self.timeout_ms / 1000.0,
                )
            except httpx.HTTPError as exc:
                raise BackendUnavailableError(f"detector at {self.url}: {exc}") from exc
        if response.status_code >= 500:
            raise BackendUnavailableError(
                f"detector at {self.url} returned {response.status_code}"
            )
        if response.status_code != 200:
            raise BackendProtocolError(
                f"detector at {self.url} returned {response.status_code}"
            )
        return _parse_detections(response.text)

    def reachable(self) -> bool:
        try:
            httpx.get(self.url, timeout=self.timeout_ms / 1000.0)
        except httpx.HTTPError:
            return False
        return True


def _parse_detections(text: str) -> list[RawBox]:
    try:
        doc = json.loads(text)
        items = doc["detections"]
        boxes = []
        for item in items:
            x0, y0, x1, y1 = item["box"]
            boxes.append(
                RawBox(
                    label=str(item["label"]),
                    score=float(item["score"]),
                    x0=float(x0), y0=float(y0), x1=float(x1), y1=float(y1),
                )
            )
        return boxes
    except (ValueError, KeyError, TypeError) as exc:
        raise BackendProtocolError(f"malformed detector payload: {exc}") from exc


def detect(image: Image, backend: DetectorBackend) -> list[RawBox]:
    """Run one backend call; raw proposals come back unvalidated."""
    return backend.detect(image)


_LABEL_BY_NAME = {label.value: label for label in PartLabel}


def _coerce_label(label: str | PartLabel) -> PartLabel:
    if isinstance(label, PartLabel):
        return label
    return _LABEL_BY_NAME.get(label.lower(), PartLabel.OTHER)


def postprocess(
    raw_boxes: list[RawBox] | list[DetectionBox],
    score_threshold: float = 0.5,
    max_boxes: int = 10,
) -> list[DetectionBox]:
    """Repair, filter, sort, and truncate raw proposals.

    Inverted corners are swapped, coordinates clamped to [0,1], and
    degenerate or sub-threshold boxes dropped. Unknown labels map to
    `other`; non-finite scores are rejected, finite ones clamped to
    [0,1]. Result is sorted by score descending, ties by (label name,
    x0) ascending, truncated to `max_boxes`. Idempotent.
    """
    if not (0.0 <= score_threshold <= 1.0):
        raise ValueError("score_threshold must be in [0, 1]")
    if max_boxes < 1:
        raise ValueError("max_boxes must be >= 1")
    repaired: list[DetectionBox] = []
    for raw in raw_boxes:
        if math.isnan(raw.score) or math.isinf(raw.score):
            continue
        coords = [raw.x0, raw.y0, raw.x1, raw.y1]
        if any(math.isnan(v) or math.isinf(v) for v in coords):
            continue
        x0, x1 = sorted((raw.x0, raw.x1))
        y0, y1 = sorted((raw.y0, raw.y1))
        x0, x1 = max(0.0, x0), min(1.0, x1)
        y0, y1 = max(0.0, y0), min(1.0, y1)
        if x0 >= x1 or y0 >= y1:
            continue
        score = min(1.0, max(0.0, raw.score))
        if score < score_threshold:
            continue
        repaired.append(
            DetectionBox(
                label=_coerce_label(raw.label),
                score=score,
                x0=x0, y0=y0, x1=x1, y1=y1,
            )
        )
    repaired.sort(key=lambda b: (-b.score, b.label.value, b.x0))
    return repaired[:max_boxes]


def overlay_spec(
    boxes: list[DetectionBox], image_w: int, image_h: int
) -> list[OverlayRect]:
    """Scale normalized boxes to pixel rectangles (round half up)."""
    if image_w < 1 or image_h < 1:
        raise ValueError("image dimensions must be >= 1")

    def px(v: float, extent: int) -> int:
        return int(math.floor(v * extent + 0.5))

    return [
        OverlayRect(
            label=box.label,
            score=box.score,
            x0=px(box.x0, image_w),
            y0=px(box.y0, image_h),
            x1=px(box.x1, image_w),
            y1=px(box.y1, image_h),
        )
        for box in boxes
    ]


_OVERLAY_YELLOW = (255, 215, 0)


def draw_overlay(image: Image, rects: list[OverlayRect], thickness: int = 2) -> Image:
    """Paint rectangle outlines onto a copy of the image (debug dumps)."""
    if image.channels != 3:
        raise ValueError("overlay drawing needs a 3-channel image")
    arr = image.to_array().copy()
    h, w = arr.shape[:2]
    for rect in rects:
        x0, y0 = max(0, rect.x0), max(0, rect.y0)
        x1, y1 = min(w, rect.x1), min(h, rect.y1)
        if x0 >= x1 or y0 >= y1:
            continue
        t = thickness
        arr[y0:min(y0 + t, h), x0:x1] = _OVERLAY_YELLOW
        arr[max(y1 - t, 0):y1, x0:x1] = _OVERLAY_YELLOW
        arr[y0:y1, x0:min(x0 + t, w)] = _OVERLAY_YELLOW
        arr[y0:y1, max(x1 - t, 0):x1] = _OVERLAY_YELLOW
    return Image.from_array(arr)
