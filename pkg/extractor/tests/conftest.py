import wave

import numpy as np
import pytest

from eocl_extractor.backbones import load_backbone

TINY_ARCH = dict(hidden_size=32, num_hidden_layers=2, num_attention_heads=2,
                 intermediate_size=64, conv_dim=(16, 16, 16, 16, 16, 16, 16),
                 num_feat_extract_layers=7)


def write_wav(path, samples, rate=16_000):
    pcm = np.round(np.clip(samples, -1, 1) * 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())
    return path


@pytest.fixture(scope="session")
def gsc_tree(tmp_path_factory):
    """A miniature speech-commands layout: 3 words x 4 utterances."""
    root = tmp_path_factory.mktemp("gsc")
    rng = np.random.default_rng(0)
    words = ["left", "right", "stop"]
    dev, test = [], []
    for word in words:
        (root / word).mkdir()
        for i in range(4):
            # between 0.3 s and 1.1 s of noise
            n = int(rng.uniform(0.3, 1.1) * 16_000)
            write_wav(root / word / f"utt{i}.wav", rng.uniform(-0.5, 0.5, n))
        dev.append(f"{word}/utt2.wav")
        test.append(f"{word}/utt3.wav")
    (root / "_background_noise_").mkdir()
    (root / "validation_list.txt").write_text("\n".join(dev) + "\n")
    (root / "testing_list.txt").write_text("\n".join(test) + "\n")
    return root


@pytest.fixture(scope="session")
def tiny_backbone():
    return load_backbone("w2v2-base", random_init=True, seed=0,
                         config_overrides=TINY_ARCH)
