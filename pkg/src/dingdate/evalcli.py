"""Evaluation command line: build a testset, run accuracy over it."""

from __future__ import annotations

from pathlib import Path

import click

from dingdate.evalbench import (
    DatasetManifest,
    ImageUnreadableError,
    build_testset,
    evaluate,
    render_table,
    report_to_kv,
)
from dingdate.imageproc import CorruptImageError, UnsupportedFormatError, decode_and_resize, to_model_input
from dingdate.nn.kernels import softmax
from dingdate.nn.weights import load_weights
from dingdate.periods import Period
from dingdate.policy import Outcome, decide


@click.group()
def main() -> None:
    """Accuracy benchmark for the dating classifier."""


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True,
              help="labeled image pool: image_ref<TAB>period per line")
@click.option("--total", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def build(manifest_path: str, total: int, seed: int, out_path: str) -> None:
    """Draw a near-uniform testset across the 11 periods."""
    pool = DatasetManifest.load(manifest_path)
    testset = build_testset(pool, total, seed)
    testset.save(out_path)
    click.echo(f"{len(testset.entries)} entries -> {out_path}")


@main.command()
@click.option("--weights", "weights_path", type=click.Path(exists=True), required=True)
@click.option("--testset", "testset_path", type=click.Path(exists=True), required=True)
@click.option("--report", "report_path", type=click.Path(), required=True)
@click.option("--mean", default="0.485,0.456,0.406", show_default=True)
@click.option("--std", default="0.229,0.224,0.225", show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--other-stuffs-threshold", default=0.05, show_default=True)
def run(weights_path: str, testset_path: str, report_path: str, mean: str,
        std: str, workers: int, other_stuffs_threshold: float) -> None:
    """Evaluate the classifier; image refs resolve next to the testset."""
    model = load_weights(weights_path)
    testset = DatasetManifest.load(testset_path)
    base = Path(testset_path).parent
    mean_t = tuple(float(v) for v in mean.split(","))
    std_t = tuple(float(v) for v in std.split(","))
    size = model.config.input_size

    def predict(ref: str) -> Period | None:
        path = base / ref
        try:
            data = path.read_bytes()
            image = decode_and_resize(data, size, size)
        except (OSError, UnsupportedFormatError, CorruptImageError) as exc:
            raise ImageUnreadableError(ref) from exc
        tensor = to_model_input(image, mean_t, std_t)
        logits, _ = model.forward(tensor.values)
        decision = decide(softmax(logits), other_stuffs_threshold)
        if decision.outcome is Outcome.OTHER_STUFFS:
            return None
        return decision.ranked[0][0]

    report = evaluate(predict, testset, workers=workers)
    table = render_table(report)
    Path(report_path).write_text(report_to_kv(report), "utf-8")
    Path(report_path + ".txt").write_text(table, "utf-8")
    click.echo(table)
    click.echo(f"report -> {report_path} (+ .txt table)")


if __name__ == "__main__":
    main()
