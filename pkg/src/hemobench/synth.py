"""Synthetic fixture generator: manifests and seeded prediction files.

Lets the whole pipeline (split, evaluate, ensemble, report) run without
any trained models.  Generation is integer-only on top of SplitMix64, so
the emitted bytes are identical on every platform.  Per-model error
counts are exact per split, which makes constructed accuracy ties
possible (e.g. two models with the same number of test errors).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    CANONICAL_CLASS_COUNTS,
    ClassTaxonomy,
    DatasetManifest,
    SampleRecord,
    SplitPlan,
    ValidationError,
    SPLIT_NAMES,
)
from .formats import atomic_write_text, write_json
from .registry import get_architecture
from .split import SplitMix64, class_seed, fisher_yates

# every probability is an integer number of millionths
_MASS = 10**6


def synth_manifest(
    counts: dict[str, int] | None = None,
    taxonomy: ClassTaxonomy | None = None,
) -> DatasetManifest:
    """Deterministic manifest with the requested per-class sample counts."""
    taxonomy = taxonomy or ClassTaxonomy.canonical()
    counts = counts or CANONICAL_CLASS_COUNTS
    unknown = set(counts) - set(taxonomy.classes)
    if unknown:
        raise ValidationError(f"counts name unknown classes: {sorted(unknown)}")
    samples = []
    for label, name in enumerate(taxonomy.classes):
        for i in range(counts.get(name, 0)):
            sid = f"{name}_{i:05d}"
            samples.append(
                SampleRecord(sid, f"images/{name}/{sid}.jpg", label)
            )
    return DatasetManifest(taxonomy=taxonomy, samples=tuple(samples))


@dataclass(frozen=True)
class SynthModelSpec:
    """Recipe for one synthetic prediction file."""

    model_name: str
    architecture: str
    seed: int
    # exact number of wrong argmax predictions per split
    errors: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthModelSpec":
        errors = {s: int(v) for s, v in doc.get("errors", {}).items()}
        bad = set(errors) - set(SPLIT_NAMES)
        if bad:
            raise ValidationError(f"unknown split names in errors: {sorted(bad)}")
        return cls(
            model_name=doc["model_name"],
            architecture=doc.get("architecture", doc["model_name"]),
            seed=int(doc["seed"]),
            errors=errors,
        )


def _prob_row(rng: SplitMix64, predicted: int, n_classes: int) -> list[int]:
    """Integer millionths summing to _MASS with a strict argmax at
    ``predicted`` (its weight always exceeds the remaining total)."""
    top = _MASS // 2 + 1 + rng.next_below(_MASS * 45 // 100)
    weights = [0] * n_classes
    weights[predicted] = top
    rest = _MASS - top
    others = [c for c in range(n_classes) if c != predicted]
    for c in others[:-1]:
        take = rng.next_below(rest + 1)
        weights[c] = take
        rest -= take
    weights[others[-1]] = rest
    return weights


def synth_predictions(
    manifest: DatasetManifest,
    plan: SplitPlan,
    spec: SynthModelSpec,
) -> tuple[list[str], list[list[int]]]:
    """Rows (sample ids + integer-millionth probabilities) for one model.

    Within each split, the wrong-prediction samples are the first
    ``errors[split]`` of a seeded shuffle of that split's ids; every other
    sample is predicted correctly.
    """
    label_of = manifest.labels_by_id()
    n_classes = manifest.taxonomy.count
    wrong_label: dict[str, int] = {}
    for split in SPLIT_NAMES:
        ids = plan.ids_for(split)
        n_errors = spec.errors.get(split, 0)
        if n_errors > len(ids):
            raise ValidationError(
                f"{spec.model_name}: {n_errors} errors requested for "
                f"{split} split of {len(ids)} samples"
            )
        rng = SplitMix64(class_seed(spec.seed, f"{spec.model_name}/{split}"))
        shuffled = fisher_yates(ids, rng)
        for sid in shuffled[:n_errors]:
            offset = 1 + rng.next_below(n_classes - 1)
            wrong_label[sid] = (label_of[sid] + offset) % n_classes

    row_rng = SplitMix64(class_seed(spec.seed, spec.model_name))
    sample_ids = sorted(label_of)
    rows = []
    for sid in sample_ids:
        predicted = wrong_label.get(sid, label_of[sid])
        rows.append(_prob_row(row_rng, predicted, n_classes))
    return sample_ids, rows


def write_synth_predictions(
    manifest: DatasetManifest,
    plan: SplitPlan,
    spec: SynthModelSpec,
    out_dir: str | Path,
) -> Path:
    """Write one model's prediction CSV + sidecar; returns the CSV path."""
    from .core import slugify
    from .formats import prediction_header, sidecar_path

    sample_ids, rows = synth_predictions(manifest, plan, spec)
    lines = [",".join(prediction_header(manifest.taxonomy))]
    for sid, weights in zip(sample_ids, rows):
        # weights are always strictly below _MASS, so "0.xxxxxx" suffices
        lines.append(sid + "," + ",".join(f"0.{w:06d}" for w in weights))
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{slugify(spec.model_name)}.csv"
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    try:
        input_size = get_architecture(spec.architecture).input_size
    except ValidationError:
        input_size = 224
    write_json(
        sidecar_path(csv_path),
        {
            "model_name": spec.model_name,
            "architecture": spec.architecture,
            "score_kind": "probability",
            "seed": spec.seed,
            "input_size": input_size,
            "epochs": 0,
            "created_by": "hemobench-synth",
        },
    )
    return csv_path
