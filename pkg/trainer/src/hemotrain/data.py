"""Dataset plumbing: manifest/plan CSV readers and an image dataset.

The trainer talks to the benchmark harness only through its file
formats, so the small CSV readers live here rather than importing the
harness package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import torch
from PIL import Image
from torch.utils.data import Dataset

CLASS_ORDER = (
    "basophil",
    "eosinophil",
    "erythroblast",
    "ig",
    "lymphocyte",
    "monocyte",
    "neutrophil",
    "platelet",
)


@dataclass(frozen=True)
class ManifestRow:
    sample_id: str
    relative_path: str
    label: int


def read_manifest(path: str | Path, classes=CLASS_ORDER) -> list[ManifestRow]:
    index = {name: i for i, name in enumerate(classes)}
    rows = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "relative_path", "label"]:
            raise ValueError(f"{path}: unexpected manifest header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            sid, rel, label = row
            if sid in seen:
                raise ValueError(f"{path}: line {lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)
            if label not in index:
                raise ValueError(f"{path}: line {lineno}: unknown label {label!r}")
            rows.append(ManifestRow(sid, rel, index[label]))
    return rows


def read_plan(path: str | Path) -> dict[str, str]:
    assignments = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "split"]:
            raise ValueError(f"{path}: unexpected plan header {header!r}")
        for row in reader:
            if row:
                assignments[row[0]] = row[1]
    return assignments


class BloodCellDataset(Dataset):
    """Images of one split, resolved relative to the manifest location."""

    def __init__(self, manifest_path, plan_path, split, transform,
                 image_root=None):
        manifest_path = Path(manifest_path)
        self.root = Path(image_root) if image_root else manifest_path.parent
        assignments = read_plan(plan_path)
        self.rows = [
            row
            for row in read_manifest(manifest_path)
            if assignments.get(row.sample_id) == split
        ]
        if not self.rows:
            raise ValueError(f"split {split!r} has no samples")
        self.rows.sort(key=lambda r: r.sample_id)
        self.transform = transform

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, idx):
        row = self.rows[idx]
        path = self.root / row.relative_path
        try:
            with Image.open(path) as img:
                tensor = self.transform(img.convert("RGB"))
        except OSError as exc:
            raise OSError(f"failed to load sample {row.sample_id!r}: {exc}") from exc
        return tensor, row.label

    def sample_ids(self):
        return [row.sample_id for row in self.rows]


def class_counts(rows: list[ManifestRow], n_classes: int = len(CLASS_ORDER)):
    counts = [0] * n_classes
    for row in rows:
        counts[row.label] += 1
    return counts
