"""Trainer command line: fine-tune one architecture and export predictions.

    hemotrain train --arch "SqueezeNet 1.1" --manifest m.csv --plan p.csv \
        --out runs/sq11 [--epochs 25 --batch 32 --lr 0.001 --seed 0 \
        --device cpu --export-splits val,test]

``--lr-dry-run`` prints the epoch/learning-rate table and exits without
touching data or weights.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import export_predictions
from .registry import ARCHITECTURES
from .schedule import schedule_table
from .train import TrainConfig, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hemotrain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune an architecture")
    p.add_argument("--arch", required=True,
                   help="registry name, e.g. 'ResNet-34' (see --list-archs)")
    p.add_argument("--manifest")
    p.add_argument("--plan")
    p.add_argument("--out")
    p.add_argument("--image-root", help="base dir for relative image paths")
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--device", default="cpu")
    p.add_argument("--no-pretrained", action="store_true",
                   help="random init instead of ImageNet weights")
    p.add_argument("--rotation-mode", choices=("random", "fixed"), default="random")
    p.add_argument("--export-splits", default="val,test",
                   help="comma list of splits to export, or 'none'")
    p.add_argument("--lr-dry-run", action="store_true",
                   help="print the learning-rate schedule and exit")
    p.set_defaults(func=cmd_train)

    p_list = sub.add_parser("list-archs", help="print registry architecture names")
    p_list.set_defaults(func=cmd_list_archs)
    return parser


def cmd_list_archs(args) -> int:
    for entry in ARCHITECTURES:
        print(f"{entry.name}  (input {entry.input_size})")
    return 0


def cmd_train(args) -> int:
    config = TrainConfig(
        architecture=args.arch,
        epochs=args.epochs,
        batch_size=args.batch,
        base_lr=args.lr,
        momentum=args.momentum,
        seed=args.seed,
        device=args.device,
        pretrained=not args.no_pretrained,
        rotation_mode=args.rotation_mode,
    )
    if args.lr_dry_run:
        print("epoch,lr")
        for epoch, lr in schedule_table(config.epochs, config.base_lr,
                                        config.lr_step, config.lr_gamma):
            print(f"{epoch},{lr:g}")
        return 0

    for name in ("manifest", "plan", "out"):
        if getattr(args, name) is None:
            print(f"hemotrain: error: --{name} is required", file=sys.stderr)
            return 1
    out_dir = Path(args.out)
    outcome = train(
        args.manifest, args.plan, config, out_dir, image_root=args.image_root
    )
    print(
        f"best val acc {outcome.best_val_acc:.4f} at epoch {outcome.best_epoch}; "
        f"curves -> {outcome.curves_path}"
    )
    splits = tuple(
        s for s in str(args.export_splits).split(",") if s and s != "none"
    )
    if splits:
        import torch

        checkpoint = torch.load(outcome.checkpoint_path, weights_only=False)
        from .models import build_model

        model = build_model(config.architecture, pretrained=False)
        model.load_state_dict(checkpoint["state_dict"])
        written = export_predictions(
            model, args.manifest, args.plan, splits, config,
            out_dir / "predictions", image_root=args.image_root,
        )
        for path in written:
            print(f"exported {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"hemotrain: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"hemotrain: error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())
