"""Mapping from benchmark architecture names to torchvision builders.

Names and slugs mirror the harness registry; input resolution is 299 for
Inception-v3 and 224 for everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torchvision.models as tvm


def _slug(name: str) -> str:
    out = "".join(ch if ch.isalnum() else "_" for ch in name.lower())
    while "__" in out:
        out = out.replace("__", "_")
    return out.strip("_")


@dataclass(frozen=True)
class ArchEntry:
    name: str
    builder: Callable
    weights: object
    input_size: int = 224

    @property
    def slug(self) -> str:
        return _slug(self.name)


ARCHITECTURES: tuple[ArchEntry, ...] = (
    ArchEntry("AlexNet", tvm.alexnet, tvm.AlexNet_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-11", tvm.vgg11, tvm.VGG11_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-13", tvm.vgg13, tvm.VGG13_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-16", tvm.vgg16, tvm.VGG16_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-19", tvm.vgg19, tvm.VGG19_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-11bn", tvm.vgg11_bn, tvm.VGG11_BN_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-13bn", tvm.vgg13_bn, tvm.VGG13_BN_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-16bn", tvm.vgg16_bn, tvm.VGG16_BN_Weights.IMAGENET1K_V1),
    ArchEntry("VGG-19bn", tvm.vgg19_bn, tvm.VGG19_BN_Weights.IMAGENET1K_V1),
    ArchEntry("ResNet-18", tvm.resnet18, tvm.ResNet18_Weights.IMAGENET1K_V1),
    ArchEntry("ResNet-34", tvm.resnet34, tvm.ResNet34_Weights.IMAGENET1K_V1),
    ArchEntry("ResNet-50", tvm.resnet50, tvm.ResNet50_Weights.IMAGENET1K_V1),
    ArchEntry("ResNet-101", tvm.resnet101, tvm.ResNet101_Weights.IMAGENET1K_V1),
    ArchEntry("ResNet-152", tvm.resnet152, tvm.ResNet152_Weights.IMAGENET1K_V1),
    ArchEntry("SqueezeNet 1.0", tvm.squeezenet1_0, tvm.SqueezeNet1_0_Weights.IMAGENET1K_V1),
    ArchEntry("SqueezeNet 1.1", tvm.squeezenet1_1, tvm.SqueezeNet1_1_Weights.IMAGENET1K_V1),
    ArchEntry("Densenet-121", tvm.densenet121, tvm.DenseNet121_Weights.IMAGENET1K_V1),
    ArchEntry("Densenet-169", tvm.densenet169, tvm.DenseNet169_Weights.IMAGENET1K_V1),
    ArchEntry("Densenet-201", tvm.densenet201, tvm.DenseNet201_Weights.IMAGENET1K_V1),
    ArchEntry("Densenet-161", tvm.densenet161, tvm.DenseNet161_Weights.IMAGENET1K_V1),
    ArchEntry("Inception-v3", tvm.inception_v3, tvm.Inception_V3_Weights.IMAGENET1K_V1,
              input_size=299),
    ArchEntry("GoogLeNet", tvm.googlenet, tvm.GoogLeNet_Weights.IMAGENET1K_V1),
    ArchEntry("MobileNet-v2", tvm.mobilenet_v2, tvm.MobileNet_V2_Weights.IMAGENET1K_V1),
    ArchEntry("ResNeXt-50-32x4d", tvm.resnext50_32x4d,
              tvm.ResNeXt50_32X4D_Weights.IMAGENET1K_V1),
    ArchEntry("ResNeXt-101-32x8d", tvm.resnext101_32x8d,
              tvm.ResNeXt101_32X8D_Weights.IMAGENET1K_V1),
    ArchEntry("Wide ResNet-50-2", tvm.wide_resnet50_2,
              tvm.Wide_ResNet50_2_Weights.IMAGENET1K_V1),
    ArchEntry("Wide ResNet-101-2", tvm.wide_resnet101_2,
              tvm.Wide_ResNet101_2_Weights.IMAGENET1K_V1),
)

_BY_KEY = {}
for entry in ARCHITECTURES:
    _BY_KEY[entry.name] = entry
    _BY_KEY[entry.slug] = entry

# the four reported ensemble members plus the two smallest entries: the
# default set for desk-scale runs (full 27-model sweeps are opt-in)
DEFAULT_RUN_SET = (
    "Wide ResNet-50-2",
    "VGG-19",
    "Wide ResNet-101-2",
    "ResNet-34",
    "SqueezeNet 1.0",
    "SqueezeNet 1.1",
)


def get_arch(name: str) -> ArchEntry:
    entry = _BY_KEY.get(name) or _BY_KEY.get(_slug(name))
    if entry is None:
        known = ", ".join(e.name for e in ARCHITECTURES)
        raise ValueError(f"unknown architecture {name!r}; known: {known}")
    return entry
