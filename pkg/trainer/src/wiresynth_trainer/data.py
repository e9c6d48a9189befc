"""Dataset loading over the wiresynth on-disk layout.

Consumes the generated tree directly (manifest.json, renders/*.png,
sequences/*.json); the token files carry their quantization spec, from which
the vocabulary size follows as 3 specials + 60 poses + 7 shapes + the three
bin counts. Everything is preloaded into memory: toy datasets are small and
epoch time should be compute, not IO.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image

PAD, BOS, EOS = 0, 1, 2
N_SPECIALS, N_POSES, N_SHAPES = 3, 60, 7
OBJECT_BLOCK_LEN = 9


def vocab_size_from_quant(quant: dict) -> int:
    return (
        N_SPECIALS
        + N_POSES
        + N_SHAPES
        + int(quant["n_bins_pos"])
        + int(quant["n_bins_rot"])
        + int(quant["n_bins_size"])
    )


def max_objects_for_profile(profile: str) -> int:
    return {"simple": 5, "complex": 10}[profile]


def max_sequence_length(profile: str) -> int:
    # BOS + pose + 9 tokens per object + EOS
    return 2 + OBJECT_BLOCK_LEN * max_objects_for_profile(profile) + 1


@dataclass
class SequenceDataset:
    images: torch.Tensor  # (N, 3, H, W), float32 in [-1, 1]
    tokens: list[list[int]]
    scene_ids: list[int]
    pose_ids: list[int]
    vocab_size: int
    max_len: int
    profile: str
    quant: dict

    def __len__(self) -> int:
        return len(self.tokens)


def _load_image(path: str, image_size: int) -> np.ndarray:
    img = Image.open(path).convert("RGB")
    if img.size != (image_size, image_size):
        img = img.resize((image_size, image_size), Image.BILINEAR)
    arr = np.asarray(img, dtype=np.float32) / 255.0
    return (arr - 0.5) / 0.5


def load_dataset(
    data_dir: str,
    pose_ids: list[int],
    mode: str = "informative",
    image_size: int = 224,
) -> SequenceDataset:
    """Read (render, token sequence) pairs for every scene at the given poses."""
    with open(os.path.join(data_dir, "manifest.json")) as f:
        manifest = json.load(f)
    profile = manifest["profile"]
    images, tokens, scene_ids, pids = [], [], [], []
    quant = None
    for scene_id in range(int(manifest["count"])):
        for pose_id in pose_ids:
            png = os.path.join(data_dir, "renders", str(scene_id), f"{pose_id}_{mode}.png")
            seq_path = os.path.join(data_dir, "sequences", str(scene_id), f"{pose_id}.json")
            with open(seq_path) as f:
                seq = json.load(f)
            if quant is None:
                quant = seq["quant"]
            elif quant != seq["quant"]:
                raise ValueError(f"inconsistent quantization specs in {seq_path}")
            images.append(_load_image(png, image_size))
            tokens.append([int(t) for t in seq["tokens"]])
            scene_ids.append(scene_id)
            pids.append(pose_id)
    if not images:
        raise ValueError(f"no samples found under {data_dir}")
    vocab = vocab_size_from_quant(quant)
    top = max(max(t) for t in tokens)
    if top >= vocab:
        raise ValueError(f"token id {top} outside vocabulary of size {vocab}")
    stacked = torch.from_numpy(np.stack(images)).permute(0, 3, 1, 2).contiguous()
    return SequenceDataset(
        images=stacked,
        tokens=tokens,
        scene_ids=scene_ids,
        pose_ids=pids,
        vocab_size=vocab,
        max_len=max_sequence_length(profile),
        profile=profile,
        quant=quant,
    )


def pad_batch(token_lists: list[list[int]], pad_to: int | None = None) -> torch.Tensor:
    n = pad_to if pad_to is not None else max(len(t) for t in token_lists)
    out = torch.full((len(token_lists), n), PAD, dtype=torch.long)
    for i, t in enumerate(token_lists):
        out[i, : len(t)] = torch.tensor(t, dtype=torch.long)
    return out


def epoch_batches(
    n: int, batch_size: int, seed: int, epoch: int
) -> list[np.ndarray]:
    """Deterministic shuffled batch index lists for one epoch."""
    order = np.random.default_rng((seed, epoch)).permutation(n)
    return [order[k : k + batch_size] for k in range(0, n, batch_size)]
