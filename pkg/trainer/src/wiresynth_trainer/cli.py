"""Trainer command line: train on a wiresynth dataset, infer predictions."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .infer import infer
from .train import TrainConfig, train


def _parse_poses(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip() != ""]


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
    parser = argparse.ArgumentParser(prog="wiresynth-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--poses", type=_parse_poses, default=list(range(0, 60, 5)))
    p.add_argument("--mode", default="informative")
    p.add_argument("--encoder", default="vit-micro")
    p.add_argument("--encoder-weights", default=None)
    p.add_argument("--decoder-dim", type=int, default=192)
    p.add_argument("--decoder-depth", type=int, default=4)
    p.add_argument("--decoder-heads", type=int, default=4)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    p.add_argument("--warmup-epochs", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-at-accuracy", type=float, default=None)

    p = sub.add_parser("infer")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--poses", type=_parse_poses, default=list(range(0, 60, 5)))
    p.add_argument("--mode", default="informative")
    p.add_argument("--batch-size", type=int, default=32)

    args = parser.parse_args(argv)
    if args.command == "train":
        config = TrainConfig(
            data_dir=args.data,
            out_dir=args.out,
            pose_ids=args.poses,
            mode=args.mode,
            encoder_variant=args.encoder,
            encoder_weights=args.encoder_weights,
            decoder_dim=args.decoder_dim,
            decoder_depth=args.decoder_depth,
            decoder_heads=args.decoder_heads,
            lr=args.lr,
            weight_decay=args.weight_decay,
            warmup_epochs=args.warmup_epochs,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
            stop_at_accuracy=args.stop_at_accuracy,
        )
        summary = train(config)
        print(json.dumps({k: v for k, v in summary.items() if k != "curve"}, indent=2))
        return 0
    count = infer(
        args.checkpoint,
        args.data,
        args.out,
        pose_ids=args.poses,
        mode=args.mode,
        batch_size=args.batch_size,
    )
    print(f"infer: wrote {count} records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
