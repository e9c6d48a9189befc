"""Toy end-to-end acceptance: memorize 20 scenes x 12 poses, then score the
greedy predictions with the primary evaluator through its CLI.

This is the slow test of the suite (tens of minutes on one CPU core; far
less with early stop). Deselect with `-m "not overfit"` during development.
"""

import json
import subprocess
import sys

import pytest

from wiresynth_trainer.data import BOS
from wiresynth_trainer.infer import infer
from wiresynth_trainer.train import TrainConfig, train

from conftest import wiresynth

POSES = list(range(0, 60, 5))  # 12 poses

pytestmark = pytest.mark.overfit


@pytest.fixture(scope="module")
def toy_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy") / "data"
    wiresynth("gen", "--profile", "simple", "--count", "20", "--seed", "5", "--out", str(root))
    wiresynth("render", "--in", str(root), "--mode", "informative")
    wiresynth("tokenize", "--in", str(root))
    return root


def test_toy_overfit_end_to_end(toy_dataset, tmp_path):
    out = tmp_path / "run"
    summary = train(
        TrainConfig(
            data_dir=str(toy_dataset),
            out_dir=str(out),
            pose_ids=POSES,
            encoder_variant="vit-micro",
            decoder_dim=192,
            decoder_depth=4,
            decoder_heads=4,
            epochs=200,
            batch_size=8,
            seed=0,
            stop_at_accuracy=0.995,
        )
    )
    assert summary["epochs_run"] <= 200
    assert summary["final_token_accuracy"] >= 0.95

    pred_path = tmp_path / "predictions.jsonl"
    count = infer(summary["checkpoint"], str(toy_dataset), str(pred_path), POSES)
    assert count == 20 * len(POSES)

    records = [json.loads(line) for line in pred_path.read_text().splitlines()]
    assert len(records) == count
    for rec in records:
        tokens = rec["tokens"]
        assert tokens[0] == BOS
        assert 3 <= tokens[1] < 63  # first generated token is a camera pose id

    report_path = tmp_path / "report.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "wiresynth.cli", "eval",
            "--pred", str(pred_path), "--in", str(toy_dataset),
            "--out", str(report_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(report_path.read_text())
    print("toy overfit report:", json.dumps(report))
    assert report["f1"] >= 0.9
    assert report["pose_accuracy"] >= 0.9
