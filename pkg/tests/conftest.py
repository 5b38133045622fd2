import pathlib

import pytest

from eocl.featio import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def suite_manifest(tmp_path_factory):
    """The desk-scale benchmark dataset: 5 classes, d=16, mixed mean/moment
    separation, 200 train / 50 test per class."""
    out = tmp_path_factory.mktemp("suite")
    spec = SyntheticSpec(
        num_classes=5,
        d=16,
        t_range=(20, 40),
        samples_per_class={"train": 200, "dev": 50, "test": 50},
        seed=11,
        moment_contrast=0.5,
    )
    return generate_synthetic(spec, pathlib.Path(out) / "data")


@pytest.fixture(scope="session")
def suite_records(suite_manifest):
    return {
        "train": suite_manifest.load_split("train"),
        "test": suite_manifest.load_split("test"),
    }


@pytest.fixture(scope="session")
def moments_manifest(tmp_path_factory):
    """Pure higher-moment separation: class means coincide."""
    out = tmp_path_factory.mktemp("moments")
    spec = SyntheticSpec(
        num_classes=5,
        d=16,
        t_range=(20, 40),
        samples_per_class={"train": 200},
        seed=13,
        moment_contrast=1.0,
    )
    return generate_synthetic(spec, pathlib.Path(out) / "data")
