"""Service command line: serve, ingest, preprocess."""

from __future__ import annotations

from pathlib import Path

import click

from dingdate.catalog import load_manifest
from dingdate.config import load_config
from dingdate.imageproc import augment, AugmentConfig, decode_image, encode_png, decode_and_resize, to_model_input
from dingdate.nn.weights import load_weights
from dingdate.policy import build_index
from dingdate.service import build_state, create_app


@click.group()
def main() -> None:
    """Bronze Ding dating service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value config file; SERVICE_* env vars override")
@click.option("--static-dir", type=click.Path(), default=None,
              help="serve a built web UI from this directory")
def serve(config_path: str | None, static_dir: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    config = load_config(config_path)
    state = build_state(config)
    app = create_app(state, static_dir=static_dir)
    host, _, port = config.listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--weights", "weights_path", type=click.Path(exists=True), required=True)
@click.option("--index-out", type=click.Path(), default=None,
              help="index sidecar path (default: index.bin next to the manifest)")
@click.option("--mean", default="0.485,0.456,0.406", show_default=True)
@click.option("--std", default="0.229,0.224,0.225", show_default=True)
def ingest(manifest_path: str, weights_path: str, index_out: str | None,
           mean: str, std: str) -> None:
    """Backfill missing embeddings via forward passes and write the index."""
    store = load_manifest(manifest_path)
    model = load_weights(weights_path)
    mean_t = tuple(float(v) for v in mean.split(","))
    std_t = tuple(float(v) for v in std.split(","))
    size = model.config.input_size
    backfilled = 0
    for record in store.records():
        if record.embedding is not None:
            continue
        data = store.open_image(record.image_ref)
        image = decode_and_resize(data, size, size)
        tensor = to_model_input(image, mean_t, std_t)
        _, embedding = model.forward(tensor.values)
        store.backfill_embedding(record.id, embedding)
        backfilled += 1
    pairs = store.embedding_pairs()
    index = build_index(pairs)
    out = Path(index_out) if index_out else Path(manifest_path).parent / "index.bin"
    index.save(out)
    click.echo(f"backfilled {backfilled} embeddings, indexed {len(pairs)} -> {out}")


@main.command()
@click.option("--image", "image_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), required=True,
              help="dump the preprocessing variants as PNGs")
@click.option("--tolerance", default=10, show_default=True)
@click.option("--edge-threshold", default=100.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
def preprocess(image_path: str, out_dir: str, tolerance: int,
               edge_threshold: float, seed: int) -> None:
    """Debug dump: original, background-removed, grayscale, feature lines."""
    image = decode_image(Path(image_path).read_bytes())
    variants = augment(
        image, seed,
        AugmentConfig(background_tolerance=tolerance, edge_threshold=edge_threshold),
    )
    names = ("original", "background_removed", "grayscale", "feature_lines")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, variant in zip(names, variants):
        (out / f"{name}.png").write_bytes(encode_png(variant))
    click.echo(f"wrote {len(variants)} variants to {out}")


if __name__ == "__main__":
    main()
