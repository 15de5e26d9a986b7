"""Service configuration: flat key=value file with environment overrides.

Any key can be overridden by an environment variable with the SERVICE_
prefix, dots replaced by underscores, upper-cased: `detector.url`
becomes SERVICE_DETECTOR_URL.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

MIN_UPLOAD_CAP = 1024 * 1024


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8000"
    weights: str = ""
    catalog: str = ""
    index: str = ""
    detector_url: str = ""
    detector_timeout_ms: int = 2000
    score_threshold: float = 0.5
    max_boxes: int = 10
    reference_k: int = 5
    other_stuffs_threshold: float = 0.05
    max_upload_bytes: int = 8 * 1024 * 1024
    inference_concurrency: int = 2
    normalize_mean: tuple[float, float, float] = (0.485, 0.456, 0.406)
    normalize_std: tuple[float, float, float] = (0.229, 0.224, 0.225)
    retain_uploads: bool = False
    retain_dir: str = ""

    def __post_init__(self) -> None:
        for name in ("score_threshold", "other_stuffs_threshold"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.reference_k < 1:
            raise ConfigError("reference_k must be >= 1")
        if self.max_boxes < 1:
            raise ConfigError("max_boxes must be >= 1")
        if self.max_upload_bytes < MIN_UPLOAD_CAP:
            raise ConfigError("max_upload_bytes must be at least 1 MiB")
        if self.inference_concurrency < 1:
            raise ConfigError("inference_concurrency must be >= 1")


_KEY_TO_FIELD = {
    "listen": "listen",
    "weights": "weights",
    "catalog": "catalog",
    "index": "index",
    "detector.url": "detector_url",
    "detector.timeout_ms": "detector_timeout_ms",
    "score_threshold": "score_threshold",
    "max_boxes": "max_boxes",
    "reference_k": "reference_k",
    "other_stuffs_threshold": "other_stuffs_threshold",
    "max_upload_bytes": "max_upload_bytes",
    "inference_concurrency": "inference_concurrency",
    "normalize.mean": "normalize_mean",
    "normalize.std": "normalize_std",
    "debug.retain_uploads": "retain_uploads",
    "debug.retain_dir": "retain_dir",
}


def _parse_value(field_name: str, raw: str):
    kinds = {f.name: f.type for f in fields(ServiceConfig)}
    kind = kinds[field_name]
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for {field_name}: {raw!r}")
    if kind.startswith("tuple"):
        parts = [float(v) for v in raw.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"{field_name} needs 3 comma-separated values")
        return tuple(parts)
    return raw


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Read key=value lines, then apply SERVICE_* overrides."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}
    if path is not None:
        for line_no, line in enumerate(
            Path(path).read_text("utf-8").splitlines(), start=1
        ):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, raw = stripped.partition("=")
            key = key.strip()
            if not sep or key not in _KEY_TO_FIELD:
                raise ConfigError(f"config line {line_no}: unknown key {key!r}")
            field_name = _KEY_TO_FIELD[key]
            values[field_name] = _parse_value(field_name, raw)
    for key, field_name in _KEY_TO_FIELD.items():
        env_key = "SERVICE_" + key.replace(".", "_").upper()
        if env_key in env:
            values[field_name] = _parse_value(field_name, env[env_key])
    return ServiceConfig(**values)
