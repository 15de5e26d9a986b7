#!/usr/bin/env python3
"""End-to-end evaluation experiment on synthetic data.

Builds the demo fixture pool, draws a near-uniform testset, evaluates
the tiny random-weights model over it, and prints the accuracy table.
With untrained weights the numbers are chance-level; the point is the
runnable protocol.

Usage: python scripts/run_sample_eval.py [fixture_dir]
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from dingdate.evalbench import DatasetManifest, build_testset, evaluate, render_table
from dingdate.imageproc import decode_and_resize, to_model_input
from dingdate.nn.kernels import softmax
from dingdate.nn.weights import load_weights
from dingdate.policy import Outcome, decide


def main() -> None:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo")
    if not (target / "pool.tsv").exists():
        subprocess.run(
            [sys.executable, str(Path(__file__).parent / "make_fixture.py"), str(target)],
            check=True,
        )
    model = load_weights(target / "tiny.nnxw")
    pool = DatasetManifest.load(target / "pool.tsv")
    testset = build_testset(pool, total_count=22, seed=0)
    size = model.config.input_size

    def predict(ref):
        data = (target / ref).read_bytes()
        tensor = to_model_input(
            decode_and_resize(data, size, size),
            (0.485, 0.456, 0.406), (0.229, 0.224, 0.225),
        )
        logits, _ = model.forward(tensor.values)
        decision = decide(softmax(logits))
        return None if decision.outcome is Outcome.OTHER_STUFFS else decision.ranked[0][0]

    report = evaluate(predict, testset, workers=4)
    print(render_table(report))


if __name__ == "__main__":
    main()
