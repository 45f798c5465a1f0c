"""Fine-tuning adapter for the blood cell classification benchmark.

Trains ImageNet-pretrained CNNs on a manifest + split plan and exports
softmax predictions in the harness wire format.
"""

__version__ = "0.1.0"

from .augment import make_augmentation
from .models import build_model, classifier_head, predict_probabilities
from .registry import ARCHITECTURES, DEFAULT_RUN_SET, get_arch
from .schedule import lr_for_epoch, schedule_table
from .train import TrainConfig, train
from .export import export_predictions
from .synth import generate_image_set

__all__ = [
    "ARCHITECTURES",
    "DEFAULT_RUN_SET",
    "TrainConfig",
    "build_model",
    "classifier_head",
    "export_predictions",
    "generate_image_set",
    "get_arch",
    "lr_for_epoch",
    "make_augmentation",
    "predict_probabilities",
    "schedule_table",
    "train",
]
