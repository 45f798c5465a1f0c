"""Fine-tuning loop: SGD with momentum, step-decayed learning rate,
cross-entropy loss, per-epoch curves and a best-validation checkpoint.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn
from torch.utils.data import DataLoader

from .augment import make_augmentation
from .data import BloodCellDataset
from .models import build_model
from .registry import get_arch
from .schedule import lr_for_epoch

CURVES_HEADER = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc")


@dataclass
class TrainConfig:
    architecture: str
    epochs: int = 25
    batch_size: int = 32
    base_lr: float = 0.001
    momentum: float = 0.9
    lr_step: int = 7
    lr_gamma: float = 0.1
    hflip: bool = True
    vflip: bool = True
    rotation_degrees: float = 60.0
    rotation_mode: str = "random"
    seed: int = 0
    device: str = "cpu"
    pretrained: bool = True
    num_workers: int = 0

    def __post_init__(self):
        get_arch(self.architecture)  # raises on unknown names
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @property
    def input_size(self) -> int:
        return get_arch(self.architecture).input_size


@dataclass
class EpochStats:
    epoch: int
    lr: float
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainOutcome:
    history: list[EpochStats] = field(default_factory=list)
    best_val_acc: float = 0.0
    best_epoch: int = 0
    curves_path: Path | None = None
    checkpoint_path: Path | None = None


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_epoch(model, loader, criterion, device, optimizer=None):
    training = optimizer is not None
    model.train(training)
    total_loss = 0.0
    correct = 0
    seen = 0
    with torch.set_grad_enabled(training):
        for images, labels in loader:
            images = images.to(device)
            labels = labels.to(device)
            if training:
                optimizer.zero_grad()
            logits = model(images)
            loss = criterion(logits, labels)
            if training:
                loss.backward()
                optimizer.step()
            total_loss += float(loss.item()) * labels.size(0)
            correct += int((logits.argmax(dim=1) == labels).sum().item())
            seen += labels.size(0)
    return total_loss / seen, correct / seen


def curves_csv_bytes(history: list[EpochStats]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVES_HEADER)
    for row in history:
        writer.writerow(
            [row.epoch, repr(row.train_loss), repr(row.train_acc),
             repr(row.val_loss), repr(row.val_acc)]
        )
    return buf.getvalue().encode("utf-8")


def train(
    manifest_path: str | Path,
    plan_path: str | Path,
    config: TrainConfig,
    out_dir: str | Path,
    image_root: str | Path | None = None,
    model: nn.Module | None = None,
) -> TrainOutcome:
    """Fine-tune one architecture and write curves.csv + best checkpoint.

    A pre-built ``model`` may be injected (tests use this to skip the
    weight download); otherwise one is built per the config.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    device = torch.device(config.device)
    torch.manual_seed(config.seed)

    if model is None:
        model = build_model(config.architecture, pretrained=config.pretrained)
    model = model.to(device)

    aug_kwargs = dict(
        hflip=config.hflip,
        vflip=config.vflip,
        rotation_degrees=config.rotation_degrees,
        rotation_mode=config.rotation_mode,
    )
    train_set = BloodCellDataset(
        manifest_path, plan_path, "train",
        make_augmentation("train", config.input_size, **aug_kwargs),
        image_root=image_root,
    )
    val_set = BloodCellDataset(
        manifest_path, plan_path, "val",
        make_augmentation("eval", config.input_size),
        image_root=image_root,
    )
    loader_rng = torch.Generator()
    loader_rng.manual_seed(config.seed)
    train_loader = DataLoader(
        train_set, batch_size=config.batch_size, shuffle=True,
        num_workers=config.num_workers, generator=loader_rng,
    )
    val_loader = DataLoader(
        val_set, batch_size=config.batch_size, shuffle=False,
        num_workers=config.num_workers,
    )

    criterion = nn.CrossEntropyLoss()
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.base_lr, momentum=config.momentum
    )

    outcome = TrainOutcome()
    checkpoint_path = out_dir / "best.pt"
    for epoch in range(1, config.epochs + 1):
        lr = lr_for_epoch(epoch, config.base_lr, config.lr_step, config.lr_gamma)
        for group in optimizer.param_groups:
            group["lr"] = lr
        train_loss, train_acc = _run_epoch(
            model, train_loader, criterion, device, optimizer
        )
        val_loss, val_acc = _run_epoch(model, val_loader, criterion, device)
        stats = EpochStats(epoch, lr, train_loss, train_acc, val_loss, val_acc)
        outcome.history.append(stats)
        print(
            f"epoch {epoch:3d}  lr {lr:g}  "
            f"train loss {train_loss:.4f} acc {train_acc:.4f}  "
            f"val loss {val_loss:.4f} acc {val_acc:.4f}"
        )
        if val_acc > outcome.best_val_acc or outcome.best_epoch == 0:
            outcome.best_val_acc = val_acc
            outcome.best_epoch = epoch
            buffer = io.BytesIO()
            torch.save(
                {"architecture": config.architecture, "epoch": epoch,
                 "val_acc": val_acc, "state_dict": model.state_dict()},
                buffer,
            )
            _atomic_write(checkpoint_path, buffer.getvalue())

    curves_path = out_dir / "curves.csv"
    _atomic_write(curves_path, curves_csv_bytes(outcome.history))
    outcome.curves_path = curves_path
    outcome.checkpoint_path = checkpoint_path
    return outcome
