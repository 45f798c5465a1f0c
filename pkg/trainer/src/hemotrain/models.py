"""Model construction: pre-trained feature extractor + fresh 8-way head.

The classifier head is replaced by a single fully connected layer (for
SqueezeNet, its 1x1 conv equivalent) initialized with He/Kaiming
weights; every parameter stays trainable so the whole network fine-tunes.
"""

from __future__ import annotations

import torch
from torch import nn

from .registry import ArchEntry, get_arch


def _he_init(module: nn.Module) -> None:
    nn.init.kaiming_normal_(module.weight, mode="fan_out", nonlinearity="relu")
    if module.bias is not None:
        nn.init.zeros_(module.bias)


def _replace_head(model: nn.Module, arch: ArchEntry, num_classes: int) -> None:
    slug = arch.slug
    if slug.startswith(("resnet", "resnext", "wide_resnet", "googlenet", "inception")):
        head = nn.Linear(model.fc.in_features, num_classes)
        _he_init(head)
        model.fc = head
    elif slug.startswith(("vgg", "alexnet")):
        head = nn.Linear(model.classifier[6].in_features, num_classes)
        _he_init(head)
        model.classifier[6] = head
    elif slug.startswith("squeezenet"):
        head = nn.Conv2d(512, num_classes, kernel_size=1)
        _he_init(head)
        model.classifier[1] = head
        model.num_classes = num_classes
    elif slug.startswith("densenet"):
        head = nn.Linear(model.classifier.in_features, num_classes)
        _he_init(head)
        model.classifier = head
    elif slug.startswith("mobilenet"):
        head = nn.Linear(model.classifier[1].in_features, num_classes)
        _he_init(head)
        model.classifier[1] = head
    else:
        raise ValueError(f"no head-replacement rule for {arch.name!r}")


def classifier_head(model: nn.Module, arch_name: str) -> nn.Module:
    """The replaced output layer (used by tests and sanity checks)."""
    slug = get_arch(arch_name).slug
    if slug.startswith(("resnet", "resnext", "wide_resnet", "googlenet", "inception")):
        return model.fc
    if slug.startswith(("vgg", "alexnet")):
        return model.classifier[6]
    if slug.startswith("squeezenet"):
        return model.classifier[1]
    if slug.startswith("densenet"):
        return model.classifier
    if slug.startswith("mobilenet"):
        return model.classifier[1]
    raise ValueError(arch_name)


def build_model(arch_name: str, num_classes: int = 8, pretrained: bool = True) -> nn.Module:
    """Construct a trainable network for the given registry architecture.

    With ``pretrained`` the ImageNet weights are fetched through
    torchvision's cache; a download failure is surfaced with a hint to
    retry with random initialization.
    """
    arch = get_arch(arch_name)
    kwargs = {}
    if arch.slug in ("inception_v3", "googlenet"):
        # these ship with auxiliary heads; keep only the main classifier
        kwargs["aux_logits"] = True if pretrained else False
        if not pretrained:
            kwargs["init_weights"] = True
    try:
        model = arch.builder(weights=arch.weights if pretrained else None, **kwargs)
    except Exception as exc:  # urllib errors vary by environment
        raise RuntimeError(
            f"could not obtain pre-trained weights for {arch.name}: {exc}; "
            "pass pretrained=False to train from random initialization"
        ) from exc
    if arch.slug == "inception_v3":
        model.aux_logits = False
        model.AuxLogits = None
    elif arch.slug == "googlenet":
        model.aux_logits = False
        model.aux1 = None
        model.aux2 = None
    _replace_head(model, arch, num_classes)
    for param in model.parameters():
        param.requires_grad = True
    return model


def predict_probabilities(model: nn.Module, batch: torch.Tensor) -> torch.Tensor:
    """Softmax class probabilities for a batch (inference mode)."""
    model.eval()
    with torch.no_grad():
        logits = model(batch)
    return torch.softmax(logits, dim=1)
