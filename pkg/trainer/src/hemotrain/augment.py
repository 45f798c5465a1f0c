"""Image transforms for training and evaluation.

Training applies random horizontal/vertical flips and a random rotation
within +/- the configured angle before resizing and center-cropping to
the network resolution; evaluation is the deterministic resize + crop of
a single view.  Both normalize with the ImageNet statistics the
pre-trained feature extractors expect.
"""

from __future__ import annotations

from torchvision import transforms

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class FixedRotation:
    """Rotate every image by the same angle (the alternative reading of
    the rotation augmentation; random range is the default)."""

    def __init__(self, degrees: float):
        self.degrees = degrees

    def __call__(self, img):
        return transforms.functional.rotate(img, self.degrees)

    def __repr__(self):
        return f"FixedRotation(degrees={self.degrees})"


def make_augmentation(
    split: str,
    input_size: int,
    *,
    hflip: bool = True,
    vflip: bool = True,
    rotation_degrees: float = 60.0,
    rotation_mode: str = "random",
) -> transforms.Compose:
    """Build the transform pipeline for ``split`` in {train, eval}."""
    if split not in ("train", "eval"):
        raise ValueError(f"split must be 'train' or 'eval', got {split!r}")
    if rotation_mode not in ("random", "fixed"):
        raise ValueError(f"rotation_mode must be 'random' or 'fixed'")

    steps: list = []
    if split == "train":
        if hflip:
            steps.append(transforms.RandomHorizontalFlip(p=0.5))
        if vflip:
            steps.append(transforms.RandomVerticalFlip(p=0.5))
        if rotation_degrees:
            if rotation_mode == "random":
                steps.append(transforms.RandomRotation(rotation_degrees))
            else:
                steps.append(FixedRotation(rotation_degrees))
    steps += [
        transforms.Resize(input_size),
        transforms.CenterCrop(input_size),
        transforms.ToTensor(),
        transforms.Normalize(IMAGENET_MEAN, IMAGENET_STD),
    ]
    return transforms.Compose(steps)
