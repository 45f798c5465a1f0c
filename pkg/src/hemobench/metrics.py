"""Confusion-matrix metrics: one-vs-all counts, accuracy, precision,
sensitivity, specificity, and macro / weighted aggregates.

Everything is computed as exact integers and `Fraction`s; decimal strings
appear only when a result is serialized or rendered.  Zero-denominator
metrics are explicitly ``None`` (undefined), never silently zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    BinaryCounts,
    ClassTaxonomy,
    ConfusionMatrix,
    DatasetManifest,
    PredictionSet,
    SplitPlan,
    ValidationError,
    format_fraction,
)

AGGREGATION_MODES = ("macro", "weighted")


def confusion_matrix(
    true_labels: Sequence[int], predicted_labels: Sequence[int], taxonomy: ClassTaxonomy
) -> ConfusionMatrix:
    """counts[t][p] = number of samples with true class t predicted as p."""
    true_arr = np.asarray(true_labels, dtype=np.int64)
    pred_arr = np.asarray(predicted_labels, dtype=np.int64)
    if true_arr.shape != pred_arr.shape or true_arr.ndim != 1:
        raise ValidationError(
            f"label vectors must be 1-D and equal length "
            f"(got {true_arr.shape} and {pred_arr.shape})"
        )
    c = taxonomy.count
    if true_arr.size:
        if true_arr.min() < 0 or true_arr.max() >= c:
            raise ValidationError("true label index out of range")
        if pred_arr.min() < 0 or pred_arr.max() >= c:
            raise ValidationError("predicted label index out of range")
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (true_arr, pred_arr), 1)
    return ConfusionMatrix(counts=counts, taxonomy=taxonomy)


def one_vs_all(cm: ConfusionMatrix, target: int) -> BinaryCounts:
    """Reduce the matrix to binary counts for one target class.

    TP is the diagonal cell; FP the rest of the target column; FN the rest
    of the target row; TN everything outside the target row and column.
    """
    c = cm.taxonomy.count
    if not 0 <= target < c:
        raise ValidationError(f"target class index {target} out of range [0, {c})")
    counts = cm.counts
    tp = int(counts[target, target])
    fp = int(counts[:, target].sum()) - tp
    fn = int(counts[target, :].sum()) - tp
    tn = cm.total() - tp - fp - fn
    return BinaryCounts(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class one-vs-all metrics; None marks a zero-denominator case."""

    precision: Fraction | None
    sensitivity: Fraction | None
    specificity: Fraction | None


def class_metrics(counts: BinaryCounts) -> ClassMetrics:
    def ratio(num: int, den: int) -> Fraction | None:
        return Fraction(num, den) if den > 0 else None

    return ClassMetrics(
        precision=ratio(counts.tp, counts.tp + counts.fp),
        sensitivity=ratio(counts.tp, counts.tp + counts.fn),
        specificity=ratio(counts.tn, counts.tn + counts.fp),
    )


def classwise_accuracy(cm: ConfusionMatrix, target: int) -> Fraction | None:
    """Diagonal cell over row sum, i.e. recall / true-positive rate.

    This is the reading under which per-class table values are reported;
    an empty row gives None.
    """
    c = cm.taxonomy.count
    if not 0 <= target < c:
        raise ValidationError(f"target class index {target} out of range [0, {c})")
    row_sum = int(cm.counts[target, :].sum())
    if row_sum == 0:
        return None
    return Fraction(int(cm.counts[target, target]), row_sum)


@dataclass(frozen=True)
class AggregateMetrics:
    mode: str
    precision: Fraction | None
    sensitivity: Fraction | None
    specificity: Fraction | None
    # class indices excluded from at least one average because the metric
    # was undefined there; non-empty means the aggregates carry a warning
    excluded: tuple[int, ...]

    @property
    def has_undefined(self) -> bool:
        return bool(self.excluded)


def aggregate_metrics(
    per_class: Sequence[ClassMetrics],
    mode: str,
    class_support: Sequence[int],
) -> AggregateMetrics:
    """Macro (unweighted) or support-weighted mean of per-class metrics.

    Classes where a metric is undefined are excluded from that metric's
    average and flagged; if every class is undefined for every metric the
    inputs are degenerate and an error is raised.
    """
    if mode not in AGGREGATION_MODES:
        raise ValidationError(f"mode must be one of {AGGREGATION_MODES}, got {mode!r}")
    if len(per_class) != len(class_support):
        raise ValidationError("per_class and class_support lengths differ")

    excluded: set[int] = set()

    def average(values: list[Fraction | None]) -> Fraction | None:
        defined = [(i, v) for i, v in enumerate(values) if v is not None]
        excluded.update(i for i, v in enumerate(values) if v is None)
        if not defined:
            return None
        if mode == "macro":
            return sum(v for _, v in defined) / len(defined)
        weight_total = sum(class_support[i] for i, _ in defined)
        if weight_total == 0:
            return None
        return (
            sum(Fraction(class_support[i]) * v for i, v in defined)
            / weight_total
        )

    precision = average([m.precision for m in per_class])
    sensitivity = average([m.sensitivity for m in per_class])
    specificity = average([m.specificity for m in per_class])
    if precision is None and sensitivity is None and specificity is None:
        raise ValidationError("all classes have undefined metrics")
    return AggregateMetrics(
        mode=mode,
        precision=precision,
        sensitivity=sensitivity,
        specificity=specificity,
        excluded=tuple(sorted(excluded)),
    )


@dataclass(frozen=True)
class EvaluationResult:
    """Full scoring of one model on one split."""

    model_name: str
    split: str
    confusion: ConfusionMatrix
    overall_accuracy: Fraction
    per_class: tuple[ClassMetrics, ...]
    aggregate: AggregateMetrics

    @property
    def taxonomy(self) -> ClassTaxonomy:
        return self.confusion.taxonomy

    def class_recalls(self) -> list[Fraction | None]:
        return [classwise_accuracy(self.confusion, i) for i in range(self.taxonomy.count)]


def evaluate_labels(
    true_labels: Sequence[int],
    predicted_labels: Sequence[int],
    taxonomy: ClassTaxonomy,
    *,
    model_name: str,
    split: str,
    aggregation: str = "macro",
) -> EvaluationResult:
    """Score a label vector pair (the shared core of all evaluations)."""
    cm = confusion_matrix(true_labels, predicted_labels, taxonomy)
    total = cm.total()
    if total == 0:
        raise ValidationError("cannot evaluate zero samples")
    per_class = tuple(class_metrics(one_vs_all(cm, i)) for i in range(taxonomy.count))
    support = [int(v) for v in cm.row_sums()]
    return EvaluationResult(
        model_name=model_name,
        split=split,
        confusion=cm,
        overall_accuracy=Fraction(int(np.trace(cm.counts)), total),
        per_class=per_class,
        aggregate=aggregate_metrics(per_class, aggregation, support),
    )


def evaluate(
    preds: PredictionSet,
    manifest: DatasetManifest,
    plan: SplitPlan,
    split: str,
    *,
    aggregation: str = "macro",
) -> EvaluationResult:
    """Evaluate a model's predictions over the samples of one split.

    The predicted label per sample is the argmax of its score row, ties
    going to the lowest class index.  Predictions must cover every sample
    of the split; extra rows for other splits are ignored.
    """
    taxonomy = manifest.taxonomy
    if preds.class_count != taxonomy.count:
        raise ValidationError(
            f"{preds.model_name}: {preds.class_count} score columns for "
            f"{taxonomy.count} classes"
        )
    known = {rec.sample_id for rec in manifest.samples}
    stray = [sid for sid in preds.sample_ids if sid not in known]
    if stray:
        shown = ", ".join(repr(s) for s in stray[:5])
        raise ValidationError(
            f"{preds.model_name}: {len(stray)} predicted sample id(s) not in "
            f"manifest: {shown}" + ("..." if len(stray) > 5 else "")
        )

    split_ids = plan.ids_for(split)
    if not split_ids:
        raise ValidationError(f"split {split!r} has no samples")
    row_of = preds.row_index()
    missing = [sid for sid in split_ids if sid not in row_of]
    if missing:
        shown = ", ".join(repr(s) for s in missing[:5])
        raise ValidationError(
            f"{preds.model_name}: missing predictions for {len(missing)} "
            f"{split} sample(s): {shown}" + ("..." if len(missing) > 5 else "")
        )

    label_of = manifest.labels_by_id()
    rows = np.array([row_of[sid] for sid in split_ids], dtype=np.intp)
    predicted = preds.argmax_labels()[rows]
    true = np.array([label_of[sid] for sid in split_ids], dtype=np.int64)
    return evaluate_labels(
        true,
        predicted,
        taxonomy,
        model_name=preds.model_name,
        split=split,
        aggregation=aggregation,
    )


# ---------------------------------------------------------------------------
# JSON serialization (exact counts, display strings rounded half-even)


def _fraction_field(value: Fraction | None, places: int = 4):
    if value is None:
        return None
    return {
        "num": value.numerator,
        "den": value.denominator,
        "display": format_fraction(value, places),
    }


def _fraction_from_field(obj) -> Fraction | None:
    if obj is None:
        return None
    return Fraction(obj["num"], obj["den"])


def result_to_dict(result: EvaluationResult, source: dict | None = None) -> dict:
    taxonomy = result.taxonomy
    per_class = []
    for i, m in enumerate(result.per_class):
        per_class.append(
            {
                "class": taxonomy.classes[i],
                "support": int(result.confusion.row_sums()[i]),
                "precision": _fraction_field(m.precision),
                "sensitivity": _fraction_field(m.sensitivity),
                "specificity": _fraction_field(m.specificity),
                "classwise_accuracy": _fraction_field(
                    classwise_accuracy(result.confusion, i)
                ),
            }
        )
    agg = result.aggregate
    doc = {
        "schema": "hemobench.result/1",
        "model_name": result.model_name,
        "split": result.split,
        "classes": list(taxonomy.classes),
        "n_samples": result.confusion.total(),
        "confusion": [[int(v) for v in row] for row in result.confusion.counts],
        "overall_accuracy": _fraction_field(result.overall_accuracy),
        "per_class": per_class,
        "aggregate": {
            "mode": agg.mode,
            "precision": _fraction_field(agg.precision),
            "sensitivity": _fraction_field(agg.sensitivity),
            "specificity": _fraction_field(agg.specificity),
            "excluded_classes": [taxonomy.classes[i] for i in agg.excluded],
            "has_undefined": agg.has_undefined,
        },
    }
    if source:
        doc["source"] = source
    return doc


def result_from_dict(doc: dict) -> EvaluationResult:
    taxonomy = ClassTaxonomy(tuple(doc["classes"]))
    cm = ConfusionMatrix(
        counts=np.array(doc["confusion"], dtype=np.int64), taxonomy=taxonomy
    )
    per_class = tuple(
        ClassMetrics(
            precision=_fraction_from_field(entry["precision"]),
            sensitivity=_fraction_from_field(entry["sensitivity"]),
            specificity=_fraction_from_field(entry["specificity"]),
        )
        for entry in doc["per_class"]
    )
    agg_doc = doc["aggregate"]
    aggregate = AggregateMetrics(
        mode=agg_doc["mode"],
        precision=_fraction_from_field(agg_doc["precision"]),
        sensitivity=_fraction_from_field(agg_doc["sensitivity"]),
        specificity=_fraction_from_field(agg_doc["specificity"]),
        excluded=tuple(
            taxonomy.index_of(name) for name in agg_doc["excluded_classes"]
        ),
    )
    return EvaluationResult(
        model_name=doc["model_name"],
        split=doc["split"],
        confusion=cm,
        overall_accuracy=_fraction_from_field(doc["overall_accuracy"]),
        per_class=per_class,
        aggregate=aggregate,
    )
