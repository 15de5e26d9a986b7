#!/usr/bin/env python3
"""Build a self-contained demo workspace: tiny random weights, a
three-artifact catalog with embeddings and index, a labeled image pool,
and a service config. Everything is seeded, so repeated runs produce
the same bytes.

Usage: python scripts/make_fixture.py [target_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from dingdate.catalog import ArtifactRecord, CatalogStore
from dingdate.imageproc import Image, decode_and_resize, encode_png, to_model_input
from dingdate.nn.model import ModelConfig, random_model
from dingdate.nn.weights import save_weights
from dingdate.periods import PERIODS, Period
from dingdate.policy import build_index

MEAN = (0.485, 0.456, 0.406)
STD = (0.229, 0.224, 0.225)

RECORDS = (
    ("d001", "Shang.Late", "round ding, two upright handles",
     "Yinxu bronzes vol. 2, pl. 41", "Anyang, Henan", "Example Museum A"),
    ("d002", "WesternZhou.Early", "square ding, four legs",
     "Zhou bronzes survey, fig. 9", "Baoji, Shaanxi", "Example Museum B"),
    ("d003", "WesternZhou.Early", "tripod 鼎",
     "青铜器图录 12", "宝鸡", "博物馆"),
)


def make_photo(seed: int, size: int = 96) -> bytes:
    rng = np.random.default_rng(seed)
    arr = np.full((size, size, 3), 235, dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    body = (yy - size // 2) ** 2 + (xx - size // 2) ** 2 <= (size // 3) ** 2
    texture = rng.integers(40, 130, (size, size, 3), dtype=np.uint8)
    arr[body] = texture[body]
    return encode_png(Image.from_array(arr))


def main() -> None:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo")
    target.mkdir(parents=True, exist_ok=True)

    config = ModelConfig(input_size=32, stage_depths=(1, 1), stage_widths=(8, 16))
    model = random_model(config, seed=7)
    weights_path = target / "tiny.nnxw"
    save_weights(model, weights_path)

    store = CatalogStore(target / "catalog")
    for i, (rid, period, shape, literature, excavation, museum) in enumerate(RECORDS):
        photo = make_photo(seed=100 + i)
        ref = store.put_image(photo)
        image = decode_and_resize(photo, 32, 32)
        _, embedding = model.forward(to_model_input(image, MEAN, STD).values)
        store.register_artifact(
            ArtifactRecord(
                id=rid, period=Period.parse(period), shape=shape,
                literature=literature, excavation=excavation, museum=museum,
                image_ref=ref, embedding=embedding,
            )
        )
    index = build_index(store.embedding_pairs())
    index.save(target / "catalog" / "index.bin")

    pool_dir = target / "pool"
    pool_dir.mkdir(exist_ok=True)
    lines = []
    for i, period in enumerate(PERIODS):
        for j in range(4):
            name = f"pool/p{i:02d}_{j}.png"
            (target / name).write_bytes(make_photo(seed=1000 + i * 10 + j))
            lines.append(f"{name}\t{period}")
    (target / "pool.tsv").write_text("\n".join(lines) + "\n", "utf-8")

    (target / "service.conf").write_text(
        "listen=127.0.0.1:8000\n"
        f"weights={weights_path}\n"
        f"catalog={target / 'catalog'}\n"
        f"index={target / 'catalog' / 'index.bin'}\n",
        "utf-8",
    )
    print(f"fixture written to {target}/")
    print(f"  serve:     dingdate serve --config {target}/service.conf")
    print(f"  testset:   evalbench build --manifest {target}/pool.tsv --total 44 "
          f"--seed 0 --out {target}/testset.tsv")


if __name__ == "__main__":
    main()
