import numpy as np

from eocl.featio import load_manifest, read_container
from eocl_extractor.containers import write_eof1, write_manifest


def test_container_bytes_read_back_by_harness(tmp_path):
    rng = np.random.default_rng(1)
    records = [(rng.standard_normal((t, 5)).astype(np.float32), t % 3)
               for t in (1, 4, 9)]
    path = write_eof1(records, tmp_path / "x.eof1", d=5)
    back = read_container(path)
    assert len(back) == 3
    for (frames, label), (seq, label2) in zip(records, back):
        assert label == label2
        np.testing.assert_array_equal(seq.data, frames.astype(np.float64))


def test_manifest_read_back_by_harness(tmp_path):
    write_eof1([(np.zeros((2, 4), dtype=np.float32), 0)], tmp_path / "train.eof1", d=4)
    write_manifest(tmp_path / "manifest.json", ["left"], 4,
                   {"train": ["train.eof1"]}, "unit-backbone", 1234)
    manifest = load_manifest(tmp_path / "manifest.json")
    manifest.validate()
    assert manifest.d == 4
    assert manifest.backbone_tag == "unit-backbone"
    assert manifest.backbone_param_count == 1234
