"""Greedy inference producing prediction files for the wiresynth evaluator."""

from __future__ import annotations

import json

import torch

from .data import load_dataset
from .train import load_checkpoint


def infer(
    checkpoint_path: str,
    data_dir: str,
    out_path: str,
    pose_ids: list[int],
    mode: str = "informative",
    batch_size: int = 32,
    device: str = "cpu",
) -> int:
    """Decode every (scene, pose) render; write JSON-lines predictions.

    One record per image: {"scene_id", "pose_id", "tokens"}, directly
    consumable by `wiresynth eval`. Returns the record count.
    """
    model, payload = load_checkpoint(checkpoint_path, device)
    ds = load_dataset(data_dir, pose_ids, mode, model.image_size)
    if ds.vocab_size != payload["vocab_size"]:
        raise ValueError(
            f"dataset vocabulary {ds.vocab_size} does not match "
            f"checkpoint {payload['vocab_size']}"
        )
    records = []
    with torch.no_grad():
        for lo in range(0, len(ds), batch_size):
            images = ds.images[lo : lo + batch_size].to(device)
            for offset, tokens in enumerate(model.greedy_decode(images)):
                k = lo + offset
                records.append(
                    {
                        "scene_id": ds.scene_ids[k],
                        "pose_id": ds.pose_ids[k],
                        "tokens": tokens,
                    }
                )
    with open(out_path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    return len(records)
