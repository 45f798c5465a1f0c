"""Registry of the 27 benchmarked CNN architectures.

Metadata only (the harness never instantiates networks): expected input
resolution, depth, parameter count, and published ImageNet error rates of
the pre-trained weights each entry fine-tunes from.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ValidationError, slugify


@dataclass(frozen=True)
class ArchitectureSpec:
    name: str
    input_size: int
    depth: int
    params_millions: float
    imagenet_top1_err: float
    imagenet_top5_err: float

    @property
    def slug(self) -> str:
        return slugify(self.name)


def _spec(name, top1, top5, depth, params, input_size=224):
    return ArchitectureSpec(
        name=name,
        input_size=input_size,
        depth=depth,
        params_millions=params,
        imagenet_top1_err=top1,
        imagenet_top5_err=top5,
    )


ARCHITECTURES: tuple[ArchitectureSpec, ...] = (
    _spec("AlexNet", 43.45, 20.91, 5, 61),
    _spec("VGG-11", 30.98, 11.37, 11, 133),
    _spec("VGG-13", 30.07, 10.75, 13, 133),
    _spec("VGG-16", 28.41, 9.62, 16, 138),
    _spec("VGG-19", 27.62, 9.12, 19, 144),
    _spec("VGG-11bn", 29.62, 10.19, 11, 133),
    _spec("VGG-13bn", 28.45, 9.63, 13, 133),
    _spec("VGG-16bn", 26.63, 8.5, 16, 138),
    _spec("VGG-19bn", 25.76, 8.15, 19, 144),
    _spec("ResNet-18", 30.24, 10.92, 18, 11),
    _spec("ResNet-34", 26.7, 8.58, 34, 21),
    _spec("ResNet-50", 23.85, 7.13, 50, 25),
    _spec("ResNet-101", 22.63, 6.44, 101, 44),
    _spec("ResNet-152", 21.69, 5.94, 152, 60),
    _spec("SqueezeNet 1.0", 41.9, 19.58, 18, 1.24),
    _spec("SqueezeNet 1.1", 41.81, 19.38, 18, 1.23),
    _spec("Densenet-121", 25.35, 7.83, 121, 8),
    _spec("Densenet-169", 24.0, 7.0, 169, 14),
    _spec("Densenet-201", 22.8, 6.43, 201, 20),
    _spec("Densenet-161", 22.35, 6.2, 161, 28),
    _spec("Inception-v3", 22.55, 6.44, 48, 24, input_size=299),
    _spec("GoogLeNet", 30.22, 10.47, 22, 6),
    _spec("MobileNet-v2", 28.12, 9.71, 53, 3),
    _spec("ResNeXt-50-32x4d", 22.38, 6.3, 50, 25),
    _spec("ResNeXt-101-32x8d", 20.69, 5.47, 101, 88),
    _spec("Wide ResNet-50-2", 21.49, 5.91, 50, 68),
    _spec("Wide ResNet-101-2", 21.16, 5.72, 101, 126),
)

_BY_NAME = {spec.name: spec for spec in ARCHITECTURES}
_BY_SLUG = {spec.slug: spec for spec in ARCHITECTURES}


def architecture_names() -> tuple[str, ...]:
    return tuple(spec.name for spec in ARCHITECTURES)


def get_architecture(name: str) -> ArchitectureSpec:
    """Look up by display name or slug; raises with the full list on miss."""
    spec = _BY_NAME.get(name) or _BY_SLUG.get(slugify(name))
    if spec is None:
        raise ValidationError(
            f"unknown architecture {name!r}; registry entries: "
            + ", ".join(architecture_names())
        )
    return spec
