"""Speech-commands dataset layout: one directory per word, utterances as
16 kHz 16-bit PCM mono wav files, dev/test membership defined by
validation_list.txt and testing_list.txt."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


class DatasetError(RuntimeError):
    pass


EXCLUDED_DIRS = {"_background_noise_"}


def read_wav(path, expected_rate: int = 16_000) -> np.ndarray:
    """Decode a 16-bit PCM mono wav into float32 in [-1, 1]."""
    path = Path(path)
    if path.suffix.lower() != ".wav":
        raise DatasetError(
            f"{path.name}: only wav input is supported; convert other formats "
            f"(e.g. opus) to 16 kHz wav first")
    try:
        with wave.open(str(path), "rb") as fh:
            if fh.getframerate() != expected_rate:
                raise DatasetError(
                    f"{path}: unsupported sample rate {fh.getframerate()}, "
                    f"expected {expected_rate}")
            if fh.getsampwidth() != 2 or fh.getnchannels() != 1:
                raise DatasetError(f"{path}: expected 16-bit PCM mono")
            raw = fh.readframes(fh.getnframes())
    except wave.Error as exc:
        raise DatasetError(f"{path}: not a valid wav file: {exc}") from exc
    return np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0


def list_words(root) -> list[str]:
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} does not exist")
    words = sorted(p.name for p in root.iterdir()
                   if p.is_dir() and p.name not in EXCLUDED_DIRS
                   and not p.name.startswith("."))
    if not words:
        raise DatasetError(f"no word directories under {root}")
    return words


def _read_list(root: Path, name: str) -> set[str]:
    path = root / name
    if not path.exists():
        return set()
    return {line.strip() for line in path.read_text().splitlines() if line.strip()}


def split_files(root) -> dict[str, list[tuple[Path, str]]]:
    """Map split name to (wav path, word) pairs, sorted for determinism."""
    root = Path(root)
    dev = _read_list(root, "validation_list.txt")
    test = _read_list(root, "testing_list.txt")
    splits: dict[str, list[tuple[Path, str]]] = {"train": [], "dev": [], "test": []}
    for word in list_words(root):
        for path in sorted((root / word).glob("*.wav")):
            rel = f"{word}/{path.name}"
            if rel in test:
                splits["test"].append((path, word))
            elif rel in dev:
                splits["dev"].append((path, word))
            else:
                splits["train"].append((path, word))
    return splits
