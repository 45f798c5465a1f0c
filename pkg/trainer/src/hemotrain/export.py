"""Prediction export in the benchmark harness wire format.

One probability CSV plus metadata sidecar per requested split, produced
from a single deterministic view of each image (eval transform, softmax
output).  The emitted files are consumed by the harness ``validate`` and
``evaluate`` commands.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from . import __version__
from .augment import make_augmentation
from .data import CLASS_ORDER, BloodCellDataset
from .registry import get_arch
from .train import TrainConfig, _atomic_write


def export_predictions(
    model: torch.nn.Module,
    manifest_path: str | Path,
    plan_path: str | Path,
    splits: tuple[str, ...],
    config: TrainConfig,
    out_dir: str | Path,
    image_root: str | Path | None = None,
    model_name: str | None = None,
) -> list[Path]:
    """Write ``<split>/<slug>.csv`` + sidecar for each requested split.

    Per-split subdirectories keep one file per model in each directory,
    so any of them can be handed to the harness as a prediction dir.
    """
    out_dir = Path(out_dir)
    arch = get_arch(config.architecture)
    model_name = model_name or arch.name
    device = torch.device(config.device)
    model = model.to(device)
    model.eval()

    written = []
    header = "sample_id," + ",".join(f"s_{name}" for name in CLASS_ORDER)
    for split in splits:
        dataset = BloodCellDataset(
            manifest_path, plan_path, split,
            make_augmentation("eval", arch.input_size),
            image_root=image_root,
        )
        loader = DataLoader(
            dataset, batch_size=config.batch_size, shuffle=False,
            num_workers=config.num_workers,
        )
        rows = []
        with torch.no_grad():
            for images, _ in loader:
                probs = torch.softmax(model(images.to(device)), dim=1)
                rows.extend(probs.cpu().double().tolist())
        lines = [header]
        for sid, row in zip(dataset.sample_ids(), rows):
            lines.append(sid + "," + ",".join(repr(v) for v in row))

        split_dir = out_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        csv_path = split_dir / f"{arch.slug}.csv"
        _atomic_write(csv_path, ("\n".join(lines) + "\n").encode("utf-8"))
        sidecar = {
            "model_name": model_name,
            "architecture": arch.name,
            "score_kind": "probability",
            "seed": config.seed,
            "input_size": arch.input_size,
            "epochs": config.epochs,
            "created_by": f"hemotrain/{__version__}",
        }
        meta_path = split_dir / f"{arch.slug}.meta.json"
        _atomic_write(
            meta_path,
            (json.dumps(sidecar, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )
        written.append(csv_path)
    return written
