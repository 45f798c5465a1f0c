"""Readers and writers for the harness wire formats.

Three file families, all UTF-8 CSV with LF endings:

* manifest:     ``sample_id,relative_path,label``
* split plan:   ``sample_id,split`` plus a ``<stem>.meta.json`` sidecar
  carrying ratios, seed and the source manifest digest
* predictions:  ``sample_id,s_<class0>,...`` plus a ``<stem>.meta.json``
  sidecar carrying model_name, architecture, score_kind, seed,
  input_size, epochs, created_by (unknown extra keys are preserved)

Writes go through a temp-file-then-rename so failures never leave
partial files behind.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import (
    ClassTaxonomy,
    DatasetManifest,
    PredictionSet,
    SampleRecord,
    SplitPlan,
    ValidationError,
    SPLIT_NAMES,
    MANIFEST_HEADER,
)

PREDICTION_META_KEYS = (
    "model_name",
    "architecture",
    "score_kind",
    "seed",
    "input_size",
    "epochs",
    "created_by",
)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: str | Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sidecar_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")


# ---------------------------------------------------------------------------
# manifest


def load_manifest(path: str | Path, taxonomy: ClassTaxonomy | None = None) -> DatasetManifest:
    """Parse a manifest CSV; errors carry 1-based line numbers."""
    taxonomy = taxonomy or ClassTaxonomy.canonical()
    samples = []
    seen: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != MANIFEST_HEADER:
            raise ValidationError(
                f"{path}: expected header {','.join(MANIFEST_HEADER)!r}, "
                f"got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(row)}"
                )
            sample_id, rel_path, label = row
            if sample_id in seen:
                raise ValidationError(
                    f"{path}: line {lineno}: duplicate sample_id {sample_id!r} "
                    f"(first seen on line {seen[sample_id]})"
                )
            seen[sample_id] = lineno
            try:
                label_idx = taxonomy.index_of(label)
            except ValidationError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
            samples.append(SampleRecord(sample_id, rel_path, label_idx))
    return DatasetManifest(taxonomy=taxonomy, samples=tuple(samples))


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    atomic_write_bytes(path, manifest.canonical_bytes())


# ---------------------------------------------------------------------------
# split plan


def save_plan(plan: SplitPlan, path: str | Path) -> None:
    lines = ["sample_id,split"]
    for sid in sorted(plan.assignments):
        lines.append(f"{sid},{plan.assignments[sid]}")
    atomic_write_text(path, "\n".join(lines) + "\n")
    write_json(
        sidecar_path(path),
        {
            "ratios": {
                "train": str(plan.ratios[0]),
                "val": str(plan.ratios[1]),
                "test": str(plan.ratios[2]),
            },
            "seed": plan.seed,
            "manifest_digest": plan.manifest_digest,
        },
    )


def load_plan(path: str | Path) -> SplitPlan:
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise ValidationError(f"{path}: missing sidecar {meta_path.name}")
    meta = read_json(meta_path)
    for key in ("ratios", "seed", "manifest_digest"):
        if key not in meta:
            raise ValidationError(f"{meta_path}: missing key {key!r}")
    try:
        ratios = tuple(Fraction(meta["ratios"][s]) for s in SPLIT_NAMES)
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{meta_path}: bad ratios: {exc}") from None

    assignments: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "split"]:
            raise ValidationError(f"{path}: expected header 'sample_id,split'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 2 fields, got {len(row)}"
                )
            sid, split = row
            if sid in assignments:
                raise ValidationError(
                    f"{path}: line {lineno}: duplicate sample_id {sid!r}"
                )
            assignments[sid] = split
    return SplitPlan(
        assignments=assignments,
        ratios=ratios,  # type: ignore[arg-type]
        seed=int(meta["seed"]),
        manifest_digest=str(meta["manifest_digest"]),
    )


# ---------------------------------------------------------------------------
# predictions


def prediction_header(taxonomy: ClassTaxonomy) -> list[str]:
    return ["sample_id"] + [f"s_{name}" for name in taxonomy.classes]


def load_predictions(
    path: str | Path,
    taxonomy: ClassTaxonomy | None = None,
    manifest: DatasetManifest | None = None,
) -> PredictionSet:
    """Load a prediction CSV plus its metadata sidecar.

    With a manifest supplied, sample ids are cross-checked against it.
    """
    taxonomy = taxonomy or (manifest.taxonomy if manifest else ClassTaxonomy.canonical())
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise ValidationError(f"{path}: missing sidecar {meta_path.name}")
    meta = read_json(meta_path)
    for key in ("model_name", "architecture", "score_kind"):
        if key not in meta:
            raise ValidationError(f"{meta_path}: missing key {key!r}")

    expected = prediction_header(taxonomy)
    sample_ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise ValidationError(
                f"{path}: header mismatch; expected {len(expected)} columns "
                f"{','.join(expected)!r}, got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ValidationError(
                    f"{path}: line {lineno}: expected {len(expected)} fields, "
                    f"got {len(row)}"
                )
            sample_ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None

    scores = np.array(rows, dtype=np.float64).reshape(len(sample_ids), taxonomy.count)
    extras = {k: v for k, v in meta.items() if k not in ("model_name", "architecture", "score_kind")}
    try:
        preds = PredictionSet(
            model_name=str(meta["model_name"]),
            architecture=str(meta["architecture"]),
            scores=scores,
            score_kind=str(meta["score_kind"]),
            sample_ids=tuple(sample_ids),
            metadata=extras,
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None

    if manifest is not None:
        known = {rec.sample_id for rec in manifest.samples}
        unknown = [sid for sid in sample_ids if sid not in known]
        if unknown:
            shown = ", ".join(repr(s) for s in unknown[:5])
            raise ValidationError(
                f"{path}: {len(unknown)} sample id(s) not in manifest: {shown}"
                + ("..." if len(unknown) > 5 else "")
            )
    return preds


def save_predictions(preds: PredictionSet, path: str | Path, taxonomy: ClassTaxonomy) -> None:
    """Write a prediction CSV + sidecar; floats use shortest round-trip repr."""
    lines = [",".join(prediction_header(taxonomy))]
    for sid, row in zip(preds.sample_ids, preds.scores):
        lines.append(sid + "," + ",".join(repr(float(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {
        "model_name": preds.model_name,
        "architecture": preds.architecture,
        "score_kind": preds.score_kind,
    }
    meta.update(preds.metadata)
    write_json(sidecar_path(path), meta)


def discover_prediction_files(pred_dir: str | Path) -> list[Path]:
    """Prediction CSVs in a directory (those with a metadata sidecar)."""
    pred_dir = Path(pred_dir)
    found = []
    for csv_path in sorted(pred_dir.glob("*.csv")):
        if sidecar_path(csv_path).exists():
            found.append(csv_path)
    return found
