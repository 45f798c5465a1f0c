"""Synthetic 8-class image set for smoke tests and CPU-only demos.

Each class gets a base color plus a class-specific blob pattern, so a
small network can separate them within an epoch or two.  Images and a
matching manifest CSV are written under one root directory.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

from .data import CLASS_ORDER

_BASE_COLORS = (
    (200, 60, 60), (60, 200, 60), (60, 60, 200), (200, 200, 60),
    (200, 60, 200), (60, 200, 200), (230, 140, 40), (120, 120, 120),
)


def generate_image_set(
    root: str | Path,
    per_class: int = 16,
    image_size: int = 64,
    seed: int = 0,
) -> Path:
    """Create images + manifest.csv under ``root``; returns manifest path."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    rows = []
    for label, name in enumerate(CLASS_ORDER):
        class_dir = root / "images" / name
        class_dir.mkdir(parents=True, exist_ok=True)
        base = np.array(_BASE_COLORS[label], dtype=np.float64)
        for i in range(per_class):
            noise = rng.normal(0.0, 18.0, size=(image_size, image_size, 3))
            img = np.clip(base[None, None, :] + noise, 0, 255)
            # class-dependent blob: position cycles with the label
            cy = (label * 7 + 12) % (image_size - 16) + 8
            cx = (label * 11 + 20) % (image_size - 16) + 8
            yy, xx = np.ogrid[:image_size, :image_size]
            blob = (yy - cy) ** 2 + (xx - cx) ** 2 <= (image_size // 8) ** 2
            img[blob] = 255 - img[blob]
            sid = f"{name}_{i:03d}"
            rel = f"images/{name}/{sid}.png"
            Image.fromarray(img.astype(np.uint8)).save(root / rel)
            rows.append((sid, rel, name))

    manifest_path = root / "manifest.csv"
    with open(manifest_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "relative_path", "label"])
        writer.writerows(rows)
    return manifest_path
