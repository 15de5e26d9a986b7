"""Deterministic image decoding and preprocessing operators.

All operators are pure: same inputs give bit-identical outputs. Images are
8-bit row-major arrays, 1 or 3 channels; resampling is sampled bilinear
with half-pixel centers so a same-size resize is the identity.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError
from scipy import ndimage


class UnsupportedFormatError(ValueError):
    """Input bytes are not a JPEG or PNG stream."""


class CorruptImageError(ValueError):
    """Input bytes look like a supported format but do not decode."""


class WrongChannelCountError(ValueError):
    """Operator applied to an image with the wrong number of channels."""


class DimensionMismatchError(ValueError):
    pass


class ZeroStdError(ValueError):
    pass


@dataclass(frozen=True)
class Image:
    """8-bit image, row-major samples, interleaved channels."""

    width: int
    height: int
    channels: int
    data: bytes

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if len(self.data) != self.width * self.height * self.channels:
            raise ValueError(
                f"data length {len(self.data)} != "
                f"{self.width}x{self.height}x{self.channels}"
            )

    def to_array(self) -> np.ndarray:
        """View as (height, width, channels) uint8."""
        return np.frombuffer(self.data, dtype=np.uint8).reshape(
            self.height, self.width, self.channels
        )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 array, got {arr.dtype}")
        h, w, c = arr.shape
        return cls(width=w, height=h, channels=c, data=arr.tobytes())


@dataclass(frozen=True)
class ImageTensor:
    """Channel-first float32 tensor ready for the classifier."""

    values: np.ndarray  # (channels, height, width), float32

    def __post_init__(self) -> None:
        if self.values.ndim != 3:
            raise ValueError("image tensor must be rank 3 (C, H, W)")
        if not np.isfinite(self.values).all():
            raise ValueError("image tensor contains non-finite values")

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.values.shape)  # type: ignore[return-value]


_JPEG_MAGIC = b"\xff\xd8\xff"
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def sniff_format(data: bytes) -> str | None:
    """Return "jpeg", "png", or None from leading magic bytes."""
    if data.startswith(_JPEG_MAGIC):
        return "jpeg"
    if data.startswith(_PNG_MAGIC):
        return "png"
    return None


def decode_image(data: bytes) -> Image:
    """Decode JPEG or PNG bytes to a 3-channel image."""
    fmt = sniff_format(data)
    if fmt is None:
        raise UnsupportedFormatError("not a JPEG or PNG stream")
    try:
        with PILImage.open(io.BytesIO(data)) as pil:
            pil.load()
            rgb = pil.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise CorruptImageError(f"failed to decode {fmt}: {exc}") from exc
    return Image.from_array(arr)


def encode_png(image: Image) -> bytes:
    """Encode to PNG, the debug-dump output format."""
    arr = image.to_array()
    mode = "L" if image.channels == 1 else "RGB"
    pil = PILImage.fromarray(arr.squeeze(-1) if image.channels == 1 else arr, mode)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def resize_bilinear(image: Image, target_w: int, target_h: int) -> Image:
    """Sampled bilinear resize with half-pixel centers and edge clamping.

    Same-size targets reproduce the source pixels exactly.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError("target dimensions must be >= 1")
    src = image.to_array().astype(np.float64)

    def axis_coords(target: int, source: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        scale = source / target
        centers = (np.arange(target) + 0.5) * scale - 0.5
        centers = np.clip(centers, 0.0, source - 1.0)
        lo = np.floor(centers).astype(np.int64)
        hi = np.minimum(lo + 1, source - 1)
        frac = centers - lo
        return lo, hi, frac

    x0, x1, fx = axis_coords(target_w, image.width)
    y0, y1, fy = axis_coords(target_h, image.height)

    top = src[y0][:, x0] * (1 - fx)[None, :, None] + src[y0][:, x1] * fx[None, :, None]
    bot = src[y1][:, x0] * (1 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
    out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
    # round half up, then clip to the 8-bit range
    out = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return Image.from_array(out)


def decode_and_resize(data: bytes, target_w: int, target_h: int) -> Image:
    """Decode JPEG/PNG bytes and bilinear-resize to the target size."""
    return resize_bilinear(decode_image(data), target_w, target_h)


# Rec. 601 luma weights; they sum to exactly 1 so gray stays fixed.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


def to_grayscale(image: Image) -> Image:
    """Collapse RGB to luma: round(0.299 R + 0.587 G + 0.114 B), half up."""
    if image.channels != 3:
        raise WrongChannelCountError(
            f"to_grayscale needs 3 channels, got {image.channels}"
        )
    arr = image.to_array().astype(np.float64)
    luma = arr @ _LUMA_WEIGHTS
    gray = np.floor(luma + 0.5).astype(np.uint8)
    return Image.from_array(gray)


_CORNER_STRUCTURE = ndimage.generate_binary_structure(2, 1)  # 4-connectivity


def remove_background(image: Image, tolerance: int = 10) -> tuple[Image, Image]:
    """Mask corner-connected background and paint it white.

    Flood fill runs from each of the four corners with that corner's pixel
    as seed color; a pixel joins the background when every channel is
    within `tolerance` of the seed and it is 4-connected to the corner
    through such pixels. Returns (image with background set to white,
    1-channel mask with 255 = background).
    """
    if image.channels != 3:
        raise WrongChannelCountError(
            f"remove_background needs 3 channels, got {image.channels}"
        )
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    arr = image.to_array().astype(np.int16)
    h, w = arr.shape[:2]
    background = np.zeros((h, w), dtype=bool)
    for cy, cx in ((0, 0), (0, w - 1), (h - 1, 0), (h - 1, w - 1)):
        seed = arr[cy, cx]
        candidate = (np.abs(arr - seed[None, None, :]) <= tolerance).all(axis=2)
        labels, _ = ndimage.label(candidate, structure=_CORNER_STRUCTURE)
        background |= labels == labels[cy, cx]
    cleaned = image.to_array().copy()
    cleaned[background] = 255
    mask = np.where(background, 255, 0).astype(np.uint8)
    return Image.from_array(cleaned), Image.from_array(mask)


def extract_feature_lines(image: Image, threshold: float) -> Image:
    """Binary edge map from 3x3 Sobel gradients with replicate borders.

    A pixel is an edge (255) iff sqrt(gx^2 + gy^2) >= threshold.
    """
    if image.channels != 1:
        raise WrongChannelCountError(
            f"extract_feature_lines needs 1 channel, got {image.channels}"
        )
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    src = image.to_array()[:, :, 0].astype(np.float64)
    p = np.pad(src, 1, mode="edge")
    gx = (
        (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2])
    )
    gy = (
        (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:])
        - (p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:])
    )
    magnitude = np.hypot(gx, gy)
    edges = np.where(magnitude >= threshold, 255, 0).astype(np.uint8)
    return Image.from_array(edges)


def to_model_input(
    image: Image,
    mean: tuple[float, float, float],
    std: tuple[float, float, float],
) -> ImageTensor:
    """Scale to [0,1], normalize per channel, and transpose to CHW."""
    if image.channels != 3:
        raise DimensionMismatchError(
            f"to_model_input needs 3 channels, got {image.channels}"
        )
    if len(mean) != 3 or len(std) != 3:
        raise DimensionMismatchError("mean and std must have 3 components")
    if any(s == 0 for s in std):
        raise ZeroStdError("std components must be nonzero")
    arr = image.to_array().astype(np.float32) / np.float32(255.0)
    mean_arr = np.asarray(mean, dtype=np.float32)
    std_arr = np.asarray(std, dtype=np.float32)
    normalized = (arr - mean_arr) / std_arr
    return ImageTensor(values=np.ascontiguousarray(normalized.transpose(2, 0, 1)))


@dataclass(frozen=True)
class AugmentConfig:
    """Knobs for the derived-variant transforms."""

    background_tolerance: int = 10
    edge_threshold: float = 100.0


def augment(
    image: Image, seed: int, config: AugmentConfig = AugmentConfig()
) -> list[Image]:
    """Return the original plus its three derived variants.

    Variants: background-removed, grayscale, and feature-line. All three
    transforms are deterministic; `seed` is part of the contract for
    future stochastic augmentations and currently does not alter output.
    """
    del seed
    cleaned, _ = remove_background(image, config.background_tolerance)
    gray = to_grayscale(image)
    lines = extract_feature_lines(gray, config.edge_threshold)
    return [image, cleaned, gray, lines]
