import numpy as np
import pytest

from conftest import write_wav
from eocl_extractor.gsc import DatasetError, list_words, read_wav, split_files


def test_read_wav_round_trip(tmp_path):
    samples = np.linspace(-0.5, 0.5, 1600)
    path = write_wav(tmp_path / "a.wav", samples)
    decoded = read_wav(path)
    assert decoded.dtype == np.float32
    np.testing.assert_allclose(decoded, samples, atol=2 / 32768)


def test_read_wav_rejects_wrong_rate(tmp_path):
    path = write_wav(tmp_path / "slow.wav", np.zeros(800), rate=8000)
    with pytest.raises(DatasetError, match="sample rate"):
        read_wav(path)


def test_read_wav_rejects_non_wav(tmp_path):
    path = tmp_path / "a.opus"
    path.write_bytes(b"OggS")
    with pytest.raises(DatasetError, match="wav"):
        read_wav(path)


def test_list_words_excludes_noise_dir(gsc_tree):
    assert list_words(gsc_tree) == ["left", "right", "stop"]


def test_split_assignment(gsc_tree):
    splits = split_files(gsc_tree)
    assert {len(splits[s]) for s in ("dev", "test")} == {3}
    assert len(splits["train"]) == 6
    train_names = {p.name for p, _ in splits["train"]}
    assert train_names == {"utt0.wav", "utt1.wav"}


def test_missing_root(tmp_path):
    with pytest.raises(DatasetError, match="root"):
        list_words(tmp_path / "nothing")
