"""Teacher-forced cross-entropy training with warmup + linear decay."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field

import torch
from torch import nn

from .data import PAD, SequenceDataset, epoch_batches, load_dataset, pad_batch
from .model import ENCODER_VARIANTS, ImageToSequence, load_encoder_weights

log = logging.getLogger("wiresynth_trainer")


@dataclass
class TrainConfig:
    data_dir: str
    out_dir: str
    pose_ids: list[int] = field(default_factory=lambda: list(range(0, 60, 5)))
    mode: str = "informative"
    encoder_variant: str = "vit-micro"
    encoder_weights: str | None = None
    decoder_dim: int = 192
    decoder_depth: int = 4
    decoder_heads: int = 4
    lr: float = 1e-4
    weight_decay: float = 1e-4
    warmup_epochs: int = 15
    epochs: int = 200
    batch_size: int = 16
    seed: int = 0
    device: str = "cpu"
    num_threads: int | None = None
    stop_at_accuracy: float | None = None  # early stop once train acc reaches this


def lr_factor(epoch: int, warmup: int, total: int) -> float:
    """Linear warmup to 1.0 at `warmup`, then linear decay to 0.0 at `total`.

    Epochs are 1-indexed; the peak rate applies exactly at the warmup epoch.
    """
    if total <= warmup:
        return min(1.0, epoch / warmup)
    if epoch <= warmup:
        return epoch / warmup
    return max(0.0, (total - epoch) / (total - warmup))


@dataclass
class EpochStats:
    epoch: int
    lr: float
    loss: float
    token_accuracy: float


def _loss_and_accuracy(logits, targets):
    flat = logits.reshape(-1, logits.shape[-1])
    tgt = targets.reshape(-1)
    loss = nn.functional.cross_entropy(flat, tgt, ignore_index=PAD)
    keep = tgt != PAD
    correct = (flat.argmax(dim=-1)[keep] == tgt[keep]).sum()
    return loss, int(correct), int(keep.sum())


def build_model(ds: SequenceDataset, config: TrainConfig) -> ImageToSequence:
    return ImageToSequence(
        vocab_size=ds.vocab_size,
        max_len=ds.max_len,
        encoder_variant=config.encoder_variant,
        decoder_dim=config.decoder_dim,
        decoder_depth=config.decoder_depth,
        decoder_heads=config.decoder_heads,
    )


def train(config: TrainConfig) -> dict:
    """Run the training loop; returns a summary with the checkpoint path.

    Writes checkpoint.pt and loss_curve.json under config.out_dir. Fixed
    seed + single worker makes runs bit-reproducible on one machine.
    """
    if config.num_threads:
        torch.set_num_threads(config.num_threads)
    torch.manual_seed(config.seed)
    spec = ENCODER_VARIANTS[config.encoder_variant]
    ds = load_dataset(config.data_dir, config.pose_ids, config.mode, spec.image_size)
    model = build_model(ds, config).to(config.device)
    if config.encoder_weights:
        loaded, total = load_encoder_weights(model, config.encoder_weights)
        log.info("loaded %d/%d encoder tensors from %s", loaded, total, config.encoder_weights)
    else:
        log.warning("no pretrained encoder weights supplied; using random init")
    opt = torch.optim.AdamW(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
    images = ds.images.to(config.device)
    padded = pad_batch(ds.tokens).to(config.device)

    curve: list[EpochStats] = []
    for epoch in range(1, config.epochs + 1):
        factor = lr_factor(epoch, config.warmup_epochs, config.epochs)
        for group in opt.param_groups:
            group["lr"] = config.lr * factor
        model.train()
        total_loss = 0.0
        total_correct = 0
        total_tokens = 0
        for idx in epoch_batches(len(ds), config.batch_size, config.seed, epoch):
            batch_imgs = images[idx]
            batch_tok = padded[idx]
            logits = model(batch_imgs, batch_tok[:, :-1])
            loss, correct, n_tok = _loss_and_accuracy(logits, batch_tok[:, 1:])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total_loss += float(loss.detach()) * n_tok
            total_correct += correct
            total_tokens += n_tok
        stats = EpochStats(
            epoch=epoch,
            lr=config.lr * factor,
            loss=total_loss / total_tokens,
            token_accuracy=total_correct / total_tokens,
        )
        curve.append(stats)
        log.info(
            "epoch %d/%d lr %.2e loss %.4f acc %.4f",
            epoch, config.epochs, stats.lr, stats.loss, stats.token_accuracy,
        )
        if (
            config.stop_at_accuracy is not None
            and stats.token_accuracy >= config.stop_at_accuracy
        ):
            log.info("early stop: accuracy target reached at epoch %d", epoch)
            break

    os.makedirs(config.out_dir, exist_ok=True)
    ckpt_path = os.path.join(config.out_dir, "checkpoint.pt")
    torch.save(
        {
            "model_state": model.state_dict(),
            "vocab_size": ds.vocab_size,
            "max_len": ds.max_len,
            "profile": ds.profile,
            "quant": ds.quant,
            "config": asdict(config),
        },
        ckpt_path,
    )
    with open(os.path.join(config.out_dir, "loss_curve.json"), "w") as f:
        json.dump([asdict(s) for s in curve], f, indent=2)
    return {
        "checkpoint": ckpt_path,
        "epochs_run": len(curve),
        "final_loss": curve[-1].loss,
        "final_token_accuracy": curve[-1].token_accuracy,
        "curve": [asdict(s) for s in curve],
    }


def load_checkpoint(path: str, device: str = "cpu") -> tuple[ImageToSequence, dict]:
    payload = torch.load(path, map_location=device, weights_only=False)
    cfg = payload["config"]
    model = ImageToSequence(
        vocab_size=payload["vocab_size"],
        max_len=payload["max_len"],
        encoder_variant=cfg["encoder_variant"],
        decoder_dim=cfg["decoder_dim"],
        decoder_depth=cfg["decoder_depth"],
        decoder_heads=cfg["decoder_heads"],
    )
    model.load_state_dict(payload["model_state"])
    model.to(device).eval()
    return model, payload
