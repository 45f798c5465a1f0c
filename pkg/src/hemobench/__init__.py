"""Benchmark harness for peripheral blood cell classification.

Deterministic stratified splitting, one-vs-all multi-class metrics,
majority-vote ensembling with validation-driven member selection, and
report rendering over prediction files from any training backend.
"""

__version__ = "0.1.0"

from .core import (
    CANONICAL_CLASSES,
    CANONICAL_CLASS_COUNTS,
    BinaryCounts,
    ClassTaxonomy,
    ConfusionMatrix,
    DatasetManifest,
    PredictionSet,
    SampleRecord,
    SplitPlan,
    ValidationError,
    softmax,
)
from .ensemble import (
    EnsembleConfig,
    ValidationData,
    ensemble_predict,
    majority_vote,
    select_members,
)
from .formats import (
    load_manifest,
    load_plan,
    load_predictions,
    save_manifest,
    save_plan,
    save_predictions,
)
from .metrics import (
    AggregateMetrics,
    ClassMetrics,
    EvaluationResult,
    aggregate_metrics,
    classwise_accuracy,
    confusion_matrix,
    evaluate,
    evaluate_labels,
    one_vs_all,
)
from .registry import ARCHITECTURES, ArchitectureSpec, get_architecture
from .report import (
    render_comparison_table,
    render_confusion,
    render_model_table,
)
from .split import SplitRatios, plan_split, verify_split

__all__ = [
    "ARCHITECTURES",
    "AggregateMetrics",
    "ArchitectureSpec",
    "BinaryCounts",
    "CANONICAL_CLASSES",
    "CANONICAL_CLASS_COUNTS",
    "ClassMetrics",
    "ClassTaxonomy",
    "ConfusionMatrix",
    "DatasetManifest",
    "EnsembleConfig",
    "EvaluationResult",
    "PredictionSet",
    "SampleRecord",
    "SplitPlan",
    "SplitRatios",
    "ValidationData",
    "ValidationError",
    "aggregate_metrics",
    "classwise_accuracy",
    "confusion_matrix",
    "ensemble_predict",
    "evaluate",
    "evaluate_labels",
    "get_architecture",
    "load_manifest",
    "load_plan",
    "load_predictions",
    "majority_vote",
    "one_vs_all",
    "plan_split",
    "render_comparison_table",
    "render_confusion",
    "render_model_table",
    "save_manifest",
    "save_plan",
    "save_predictions",
    "softmax",
    "verify_split",
]
