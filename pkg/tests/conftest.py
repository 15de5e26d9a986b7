"""Shared fixtures: tiny model, demo images, fixture catalog, service app."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dingdate.catalog import ArtifactRecord, CatalogStore
from dingdate.imageproc import Image, encode_png
from dingdate.nn.model import ModelConfig, random_model
from dingdate.nn.weights import save_weights
from dingdate.periods import Period

TINY_CONFIG = ModelConfig(input_size=32, stage_depths=(1, 1), stage_widths=(8, 16))


@pytest.fixture(scope="session")
def tiny_model():
    return random_model(TINY_CONFIG, seed=7)


@pytest.fixture()
def tiny_weights_path(tiny_model, tmp_path):
    path = tmp_path / "tiny.nnxw"
    save_weights(tiny_model, path)
    return path


def make_photo(seed: int, size: int = 48) -> bytes:
    """A deterministic PNG: noisy vessel-ish blob on a light backdrop."""
    rng = np.random.default_rng(seed)
    arr = np.full((size, size, 3), 235, dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    blob = (yy - size // 2) ** 2 + (xx - size // 2) ** 2 <= (size // 3) ** 2
    texture = rng.integers(40, 120, (size, size, 3), dtype=np.uint8)
    arr[blob] = texture[blob]
    return encode_png(Image.from_array(arr))


@pytest.fixture()
def fixture_photo() -> bytes:
    return make_photo(seed=11)


DEMO_RECORDS = (
    ("d001", "Shang.Late", "round ding", "Yinxu bronzes vol. 2", "Anyang", "Museum A"),
    ("d002", "WesternZhou.Early", "square ding", "Zhou bronzes", "Baoji", "Museum B"),
    ("d003", "WesternZhou.Early", "tripod 鼎", "青铜器图录",
     "宝鸡", "博物馆"),
)


def build_demo_catalog(root: Path, with_embeddings: bool = True) -> CatalogStore:
    """Three-artifact catalog with deterministic images and embeddings."""
    store = CatalogStore(root)
    rng = np.random.default_rng(23)
    for i, (rid, period, shape, literature, excavation, museum) in enumerate(DEMO_RECORDS):
        ref = store.put_image(make_photo(seed=100 + i))
        embedding = None
        if with_embeddings:
            embedding = rng.standard_normal(16).astype(np.float32)
        store.register_artifact(
            ArtifactRecord(
                id=rid,
                period=Period.parse(period),
                shape=shape,
                literature=literature,
                excavation=excavation,
                museum=museum,
                image_ref=ref,
                embedding=embedding,
            )
        )
    return store


@pytest.fixture()
def demo_catalog(tmp_path):
    return build_demo_catalog(tmp_path / "catalog")
