import subprocess
import sys
from pathlib import Path

import pytest

from hemotrain import generate_image_set


@pytest.fixture(scope="session")
def image_workspace(tmp_path_factory):
    """Synthetic 8-class image set (16/class) with a harness split plan."""
    root = tmp_path_factory.mktemp("imageset")
    manifest = generate_image_set(root, per_class=16, seed=11)
    result = subprocess.run(
        [sys.executable, "-m", "hemobench", "split",
         "--manifest", str(manifest), "--seed", "3",
         "--out", str(root / "plan.csv")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    return root


def run_hemobench(*argv):
    return subprocess.run(
        [sys.executable, "-m", "hemobench", *map(str, argv)],
        capture_output=True, text=True,
    )
