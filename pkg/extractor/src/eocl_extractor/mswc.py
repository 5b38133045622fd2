"""Micro-set construction for the multilingual spoken-words corpus.

Works on the per-language splits CSV (columns SET, LINK, WORD, ...):
keep the N most frequent train words, sample up to 1k train utterances
per word, and filter dev/test to just those words.
"""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import numpy as np

from .gsc import DatasetError

SAMPLES_PER_WORD = 1000

_SET_NAMES = {"TRAIN": "train", "DEV": "dev", "TEST": "test"}


def _load_rows(csv_path) -> list[tuple[str, str, str]]:
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise DatasetError(f"splits csv {csv_path} does not exist")
    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"SET", "LINK", "WORD"} <= set(reader.fieldnames):
            raise DatasetError(f"{csv_path}: expected SET/LINK/WORD columns")
        for row in reader:
            split = _SET_NAMES.get(row["SET"].strip().upper())
            if split is not None:
                rows.append((split, row["LINK"].strip(), row["WORD"].strip()))
    return rows


def build_mswc_micro(splits_csv, n_words: int, seed: int = 0,
                     samples_per_word: int = SAMPLES_PER_WORD) -> dict:
    """Return {'words': [...], 'train': [(link, word)...], 'dev': ..., 'test': ...}."""
    if n_words < 1:
        raise DatasetError("n_words must be >= 1")
    rows = _load_rows(splits_csv)
    train_counts = Counter(word for split, _, word in rows if split == "train")
    if len(train_counts) < n_words:
        raise DatasetError(
            f"requested {n_words} words but the train split has only {len(train_counts)}")
    # most frequent first; ties alphabetical for determinism
    ranked = sorted(train_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    words = sorted(word for word, _ in ranked[:n_words])
    kept = set(words)

    lists: dict[str, list[tuple[str, str]]] = {"train": [], "dev": [], "test": []}
    by_word: dict[str, list[str]] = {w: [] for w in words}
    for split, link, word in rows:
        if word not in kept:
            continue
        if split == "train":
            by_word[word].append(link)
        else:
            lists[split].append((link, word))

    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF]))
    for word in words:
        links = sorted(by_word[word])
        if len(links) > samples_per_word:
            picks = rng.choice(len(links), size=samples_per_word, replace=False)
            links = [links[i] for i in sorted(picks)]
        lists["train"].extend((link, word) for link in links)

    for split in ("dev", "test"):
        lists[split].sort()
    return {"words": words, **lists}
