"""Portable binary weights container.

Layout, all integers little-endian:

    magic "NNXW" (4 bytes)
    u32 version (= 1)
    u32 tensor count
    per tensor: u16 name length | name UTF-8 | u8 rank | u32 extents[rank]
                | raw float32 little-endian values
    u32 config length | config UTF-8, one key=value per line

Tensors are written sorted by name so save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from dingdate.nn.model import Model, ModelConfig

MAGIC = b"NNXW"
FORMAT_VERSION = 1


class WeightsFormatError(ValueError):
    """Base class for malformed or inconsistent weights files."""


class BadMagicError(WeightsFormatError):
    pass


class VersionUnsupportedError(WeightsFormatError):
    pass


class MissingTensorError(WeightsFormatError):
    def __init__(self, name: str):
        super().__init__(f"required tensor missing: {name}")
        self.name = name


class UnexpectedTensorError(WeightsFormatError):
    def __init__(self, name: str):
        super().__init__(f"tensor not required by the config: {name}")
        self.name = name


class ShapeMismatchError(WeightsFormatError):
    def __init__(self, name: str, got: tuple[int, ...], expected: tuple[int, ...]):
        super().__init__(f"tensor {name} has shape {got}, expected {expected}")
        self.name = name


def _config_to_lines(config: ModelConfig) -> str:
    return "".join(
        f"{key}={value}\n"
        for key, value in (
            ("input_size", config.input_size),
            ("stage_depths", ",".join(map(str, config.stage_depths))),
            ("stage_widths", ",".join(map(str, config.stage_widths))),
            ("num_classes", config.num_classes),
            ("embedding_dim", config.embedding_dim),
        )
    )


def _config_from_lines(text: str) -> ModelConfig:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise WeightsFormatError(f"malformed config line: {line!r}")
        fields[key.strip()] = value.strip()
    try:
        return ModelConfig(
            input_size=int(fields["input_size"]),
            stage_depths=tuple(int(v) for v in fields["stage_depths"].split(",")),
            stage_widths=tuple(int(v) for v in fields["stage_widths"].split(",")),
            num_classes=int(fields["num_classes"]),
            embedding_dim=int(fields["embedding_dim"]),
        )
    except KeyError as exc:
        raise WeightsFormatError(f"config block missing key {exc}") from None
    except ValueError as exc:
        raise WeightsFormatError(f"bad config value: {exc}") from None


def _write_tensor(fh: BinaryIO, name: str, values: np.ndarray) -> None:
    encoded = name.encode("utf-8")
    fh.write(struct.pack("<H", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<B", values.ndim))
    fh.write(struct.pack(f"<{values.ndim}I", *values.shape))
    fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def save_weights(model: Model, path: str | Path) -> None:
    """Write the model to `path` in the container format above."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(model.params)))
        for name in sorted(model.params):
            _write_tensor(fh, name, model.params[name])
        config_bytes = _config_to_lines(model.config).encode("utf-8")
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise WeightsFormatError(f"truncated file while reading {what}")
    return data


def load_weights(path: str | Path) -> Model:
    """Read a weights file and return a forward-ready model.

    Validates magic, version, and that the tensor table exactly matches
    the parameter set the config requires.
    """
    path = Path(path)
    with path.open("rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise BadMagicError(f"{path} is not a weights file")
        version, count = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != FORMAT_VERSION:
            raise VersionUnsupportedError(f"format version {version} unsupported")
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "tensor name length"))
            name = _read_exact(fh, name_len, "tensor name").decode("utf-8")
            if name in tensors:
                raise WeightsFormatError(f"duplicate tensor: {name}")
            (rank,) = struct.unpack("<B", _read_exact(fh, 1, "tensor rank"))
            shape = struct.unpack(
                f"<{rank}I", _read_exact(fh, 4 * rank, "tensor extents")
            )
            n_values = int(np.prod(shape, dtype=np.int64)) if rank else 1
            raw = _read_exact(fh, 4 * n_values, f"values of {name}")
            values = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
            if not np.isfinite(values).all():
                raise WeightsFormatError(f"tensor {name} contains non-finite values")
            tensors[name] = values
        (config_len,) = struct.unpack("<I", _read_exact(fh, 4, "config length"))
        config_text = _read_exact(fh, config_len, "config block").decode("utf-8")
        if fh.read(1):
            raise WeightsFormatError("trailing bytes after config block")

    config = _config_from_lines(config_text)
    expected = config.parameter_shapes()
    for name, shape in expected.items():
        if name not in tensors:
            raise MissingTensorError(name)
        if tuple(tensors[name].shape) != shape:
            raise ShapeMismatchError(name, tuple(tensors[name].shape), shape)
    for name in tensors:
        if name not in expected:
            raise UnexpectedTensorError(name)
    return Model(config=config, params=tensors)
