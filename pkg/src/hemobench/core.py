"""Core domain types shared by every part of the benchmark harness.

All types are immutable after construction and safe to share across
threads.  Numeric results are kept as exact integers / `Fraction`s and
only rendered to decimal strings at report time.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

# The eight peripheral blood cell classes, in the canonical (alphabetical)
# order used by every matrix and file this tool reads or writes.
CANONICAL_CLASSES = (
    "basophil",
    "eosinophil",
    "erythroblast",
    "ig",
    "lymphocyte",
    "monocyte",
    "neutrophil",
    "platelet",
)

# Published per-class image counts of the public PBC dataset (17,092 images
# total).  Useful for sanity-checking a manifest built from a local copy.
CANONICAL_CLASS_COUNTS = {
    "basophil": 1218,
    "eosinophil": 3117,
    "erythroblast": 1551,
    "ig": 2895,
    "lymphocyte": 1214,
    "monocyte": 1420,
    "neutrophil": 3329,
    "platelet": 2348,
}

MANIFEST_HEADER = ("sample_id", "relative_path", "label")

SPLIT_NAMES = ("train", "val", "test")

# Row-sum tolerance for probability-kind prediction files (float32 softmax
# output from any backend fits comfortably).
PROBABILITY_ROW_SUM_TOL = 1e-5

SCORE_KINDS = ("probability", "logit")


class ValidationError(ValueError):
    """A domain invariant was violated (malformed file, bad counts, ...)."""


@dataclass(frozen=True)
class ClassTaxonomy:
    """Ordered set of class labels defining matrix and file column order."""

    classes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(self.classes) < 2:
            raise ValidationError("taxonomy needs at least 2 classes")
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("class names must be unique")
        for name in self.classes:
            if not name:
                raise ValidationError("class names must be non-empty")

    @property
    def count(self) -> int:
        return len(self.classes)

    def index_of(self, name: str) -> int:
        try:
            return self.classes.index(name)
        except ValueError:
            raise ValidationError(
                f"unknown class label {name!r}; known: {', '.join(self.classes)}"
            ) from None

    @classmethod
    def canonical(cls) -> "ClassTaxonomy":
        return cls(CANONICAL_CLASSES)


@dataclass(frozen=True)
class SampleRecord:
    """One dataset sample: unique id, image path, class index."""

    sample_id: str
    relative_path: str
    label: int


@dataclass(frozen=True)
class DatasetManifest:
    """All samples of a dataset plus the taxonomy they are labelled with.

    The digest is a SHA-256 over a canonicalized CSV rendering (rows sorted
    by sample_id, LF endings), so it survives row reordering but changes on
    any sample edit.
    """

    taxonomy: ClassTaxonomy
    samples: tuple[SampleRecord, ...]
    digest: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        seen: dict[str, int] = {}
        for i, rec in enumerate(self.samples):
            if not rec.sample_id:
                raise ValidationError(f"sample #{i}: empty sample_id")
            if rec.sample_id in seen:
                raise ValidationError(
                    f"duplicate sample_id {rec.sample_id!r} "
                    f"(samples #{seen[rec.sample_id]} and #{i})"
                )
            seen[rec.sample_id] = i
            if not 0 <= rec.label < self.taxonomy.count:
                raise ValidationError(
                    f"sample {rec.sample_id!r}: label index {rec.label} out of range"
                )
        object.__setattr__(
            self, "digest", hashlib.sha256(self.canonical_bytes()).hexdigest()
        )

    def canonical_bytes(self) -> bytes:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for rec in sorted(self.samples, key=lambda r: r.sample_id):
            writer.writerow(
                [rec.sample_id, rec.relative_path, self.taxonomy.classes[rec.label]]
            )
        return buf.getvalue().encode("utf-8")

    def class_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(self.taxonomy.classes, 0)
        for rec in self.samples:
            counts[self.taxonomy.classes[rec.label]] += 1
        return counts

    def labels_by_id(self) -> dict[str, int]:
        return {rec.sample_id: rec.label for rec in self.samples}

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SplitPlan:
    """Assignment of every manifest sample to train/val/test.

    Carries the seed, ratios and source-manifest digest so a plan can be
    audited and reproduced.  Ratios are exact rationals.
    """

    assignments: dict[str, str]
    ratios: tuple[Fraction, Fraction, Fraction]
    seed: int
    manifest_digest: str

    def __post_init__(self):
        for sid, split in self.assignments.items():
            if split not in SPLIT_NAMES:
                raise ValidationError(
                    f"sample {sid!r}: unknown split {split!r} "
                    f"(expected one of {', '.join(SPLIT_NAMES)})"
                )

    def ids_for(self, split: str) -> list[str]:
        if split not in SPLIT_NAMES:
            raise ValidationError(f"unknown split {split!r}")
        return sorted(s for s, v in self.assignments.items() if v == split)


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for numerical stability."""
    scores = np.asarray(scores, dtype=np.float64)
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class PredictionSet:
    """Per-model matrix of per-sample class scores plus model metadata."""

    model_name: str
    architecture: str
    scores: np.ndarray
    score_kind: str
    sample_ids: tuple[str, ...]
    metadata: dict

    def __post_init__(self):
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        scores = np.asarray(self.scores, dtype=np.float64)
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.score_kind not in SCORE_KINDS:
            raise ValidationError(
                f"score_kind must be one of {SCORE_KINDS}, got {self.score_kind!r}"
            )
        if scores.ndim != 2:
            raise ValidationError("scores must be a 2-D matrix")
        if len(self.sample_ids) != scores.shape[0]:
            raise ValidationError(
                f"{len(self.sample_ids)} sample ids for {scores.shape[0]} score rows"
            )
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValidationError("sample_ids must be unique")
        if self.score_kind == "probability":
            if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
                raise ValidationError("probability scores must lie in [0, 1]")
            sums = scores.sum(axis=1)
            bad = np.nonzero(np.abs(sums - 1.0) > PROBABILITY_ROW_SUM_TOL)[0]
            if bad.size:
                i = int(bad[0])
                raise ValidationError(
                    f"probability row for sample {self.sample_ids[i]!r} sums to "
                    f"{sums[i]:.6f} (must be 1 within {PROBABILITY_ROW_SUM_TOL:g})"
                )

    @property
    def class_count(self) -> int:
        return self.scores.shape[1]

    def probability_view(self) -> np.ndarray:
        """Scores as probabilities; logits are softmax-normalized."""
        if self.score_kind == "probability":
            return self.scores
        return softmax(self.scores)

    def argmax_labels(self) -> np.ndarray:
        """Predicted class per row; ties resolve to the lowest class index."""
        return np.argmax(self.scores, axis=1)

    def row_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.sample_ids)}


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """C x C integer counts; rows are true classes, columns predictions."""

    counts: np.ndarray
    taxonomy: ClassTaxonomy

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.taxonomy == other.taxonomy and np.array_equal(
            self.counts, other.counts
        )

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.taxonomy.count, self.taxonomy.count):
            raise ValidationError(
                f"confusion matrix shape {counts.shape} does not match "
                f"{self.taxonomy.count} classes"
            )
        if counts.size and counts.min() < 0:
            raise ValidationError("confusion matrix counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def total(self) -> int:
        return int(self.counts.sum())

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class BinaryCounts:
    """One-vs-all reduction of a confusion matrix for one target class."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def format_fraction(value: Fraction, places: int) -> str:
    """Render an exact fraction as fixed-point decimal, half-even rounding.

    Pure integer arithmetic so results are bit-identical everywhere.
    """
    if places < 0:
        raise ValueError("places must be >= 0")
    sign = "-" if value < 0 else ""
    scaled = abs(value.numerator) * 10**places
    quot, rem = divmod(scaled, value.denominator)
    double = 2 * rem
    if double > value.denominator or (double == value.denominator and quot % 2 == 1):
        quot += 1
    digits = str(quot).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def format_percent(value: Fraction, places: int = 2) -> str:
    return format_fraction(value * 100, places)


def slugify(name: str) -> str:
    """File-system friendly token for a model or class name."""
    out = []
    for ch in name.lower():
        out.append(ch if ch.isalnum() else "_")
    slug = "".join(out)
    while "__" in slug:
        slug = slug.replace("__", "_")
    return slug.strip("_")
