import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hemobench import ClassTaxonomy, DatasetManifest, SampleRecord


@pytest.fixture
def taxonomy8():
    return ClassTaxonomy.canonical()


@pytest.fixture
def taxonomy2():
    return ClassTaxonomy(("neg", "pos"))


@pytest.fixture
def taxonomy3():
    return ClassTaxonomy(("a", "b", "c"))


def make_manifest(counts, taxonomy=None):
    """Small deterministic manifest with the given per-class counts."""
    if taxonomy is None:
        names = tuple(f"class{i}" for i in range(len(counts)))
        taxonomy = ClassTaxonomy(names)
    samples = []
    for label, n in enumerate(counts):
        for i in range(n):
            sid = f"{taxonomy.classes[label]}-{i:04d}"
            samples.append(SampleRecord(sid, f"img/{sid}.jpg", label))
    return DatasetManifest(taxonomy=taxonomy, samples=tuple(samples))
