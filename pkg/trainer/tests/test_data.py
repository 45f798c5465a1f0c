import pytest

from hemotrain.augment import make_augmentation
from hemotrain.data import BloodCellDataset, CLASS_ORDER, read_manifest, read_plan


def test_class_order_matches_harness_taxonomy():
    assert CLASS_ORDER == (
        "basophil", "eosinophil", "erythroblast", "ig",
        "lymphocyte", "monocyte", "neutrophil", "platelet",
    )


def test_read_manifest_and_plan(image_workspace):
    rows = read_manifest(image_workspace / "manifest.csv")
    assert len(rows) == 128
    assignments = read_plan(image_workspace / "plan.csv")
    assert set(assignments.values()) == {"train", "val", "test"}
    assert len(assignments) == 128


def test_duplicate_manifest_id_rejected(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text(
        "sample_id,relative_path,label\n"
        "a,x.png,basophil\n"
        "a,y.png,platelet\n"
    )
    with pytest.raises(ValueError, match="duplicate"):
        read_manifest(path)


def test_dataset_serves_split_samples(image_workspace):
    dataset = BloodCellDataset(
        image_workspace / "manifest.csv",
        image_workspace / "plan.csv",
        "val",
        make_augmentation("eval", 64),
    )
    assert len(dataset) == 32
    tensor, label = dataset[0]
    assert tensor.shape == (3, 64, 64)
    assert 0 <= label < 8
    assert dataset.sample_ids() == sorted(dataset.sample_ids())


def test_missing_image_names_sample(image_workspace, tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text(
        "sample_id,relative_path,label\nghost-01,missing/ghost.png,basophil\n"
    )
    plan = tmp_path / "p.csv"
    plan.write_text("sample_id,split\nghost-01,train\n")
    dataset = BloodCellDataset(manifest, plan, "train", make_augmentation("eval", 64))
    with pytest.raises(OSError, match="ghost-01"):
        dataset[0]


def test_empty_split_rejected(image_workspace, tmp_path):
    plan = tmp_path / "p.csv"
    rows = read_manifest(image_workspace / "manifest.csv")
    plan.write_text(
        "sample_id,split\n"
        + "\n".join(f"{r.sample_id},train" for r in rows)
        + "\n"
    )
    with pytest.raises(ValueError, match="no samples"):
        BloodCellDataset(
            image_workspace / "manifest.csv", plan, "test",
            make_augmentation("eval", 64),
        )
