import json
import os

import pytest

from wiresynth_trainer.train import TrainConfig, load_checkpoint, train


def quick_config(data_dir, out_dir, **overrides):
    base = dict(
        data_dir=str(data_dir),
        out_dir=str(out_dir),
        pose_ids=[0, 18],
        encoder_variant="vit-nano",
        decoder_dim=64,
        decoder_depth=2,
        decoder_heads=2,
        epochs=2,
        batch_size=4,
        seed=7,
        num_threads=1,
    )
    base.update(overrides)
    return TrainConfig(**base)


class TestTrainLoop:
    def test_checkpoint_and_curve_written(self, mini_dataset, tmp_path):
        out = tmp_path / "run"
        summary = train(quick_config(mini_dataset, out))
        assert os.path.isfile(summary["checkpoint"])
        curve = json.loads((out / "loss_curve.json").read_text())
        assert len(curve) == 2
        assert summary["epochs_run"] == 2
        model, payload = load_checkpoint(summary["checkpoint"])
        assert payload["vocab_size"] == 114
        assert payload["profile"] == "simple"
        assert model.image_size == 96

    def test_first_epoch_loss_reproducible_to_6_sigfigs(self, mini_dataset, tmp_path):
        a = train(quick_config(mini_dataset, tmp_path / "a", epochs=1))
        b = train(quick_config(mini_dataset, tmp_path / "b", epochs=1))
        la, lb = a["curve"][0]["loss"], b["curve"][0]["loss"]
        assert f"{la:.6g}" == f"{lb:.6g}"

    def test_loss_decreases_over_first_10_epochs(self, mini_dataset, tmp_path):
        summary = train(
            quick_config(
                mini_dataset, tmp_path / "run10", epochs=10, warmup_epochs=3, lr=3e-4
            )
        )
        losses = [s["loss"] for s in summary["curve"]]
        assert all(l > 0 and l == l for l in losses)  # finite, positive
        assert losses[-1] < losses[0]

    def test_early_stop(self, mini_dataset, tmp_path):
        summary = train(
            quick_config(mini_dataset, tmp_path / "stop", epochs=5, stop_at_accuracy=0.0)
        )
        assert summary["epochs_run"] == 1
