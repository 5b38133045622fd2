"""Extraction jobs: dataset -> frozen backbone -> EOF1 containers + manifest."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import gsc, mswc
from .backbones import Backbone, load_backbone
from .containers import write_eof1, write_manifest

DATASET_KINDS = ("gsc", "mswc-micro")


@dataclasses.dataclass
class ExtractionJob:
    dataset_root: Path
    dataset_kind: str
    backbone: str
    out_dir: Path
    split: str = "all"        # train | dev | test | all
    random_init: bool = False
    layer: int = -1
    sample_rate: int = 16_000
    language: str | None = None   # mswc-micro
    n_words: int | None = None    # mswc-micro, one of {25, 50, 100}
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.dataset_root = Path(self.dataset_root)
        self.out_dir = Path(self.out_dir)
        if self.dataset_kind not in DATASET_KINDS:
            raise gsc.DatasetError(f"unknown dataset kind {self.dataset_kind!r}")
        if self.dataset_kind == "mswc-micro" and (self.language is None or self.n_words is None):
            raise gsc.DatasetError("mswc-micro extraction needs --language and --n-words")

    def wanted_splits(self) -> list[str]:
        if self.split == "all":
            return ["train", "dev", "test"]
        if self.split not in ("train", "dev", "test"):
            raise gsc.DatasetError(f"unknown split {self.split!r}")
        return [self.split]


def _gsc_listing(job: ExtractionJob):
    splits = gsc.split_files(job.dataset_root)
    class_names = gsc.list_words(job.dataset_root)
    return class_names, {name: splits[name] for name in job.wanted_splits()}


def _mswc_listing(job: ExtractionJob):
    csv_path = job.dataset_root / f"{job.language}_splits.csv"
    micro = mswc.build_mswc_micro(csv_path, job.n_words, seed=job.seed)
    class_names = micro["words"]
    listing = {}
    for name in job.wanted_splits():
        listing[name] = [(job.dataset_root / link, word) for link, word in micro[name]]
    return class_names, listing


def extract(job: ExtractionJob, backbone: Backbone | None = None) -> Path:
    """Run the job; returns the manifest path.

    A pre-built `backbone` skips loading (used by tests to inject small
    random architectures).
    """
    if backbone is None:
        backbone = load_backbone(job.backbone, random_init=job.random_init,
                                 layer=job.layer, seed=job.seed)

    if job.dataset_kind == "gsc":
        class_names, listing = _gsc_listing(job)
    else:
        class_names, listing = _mswc_listing(job)
    label_of = {word: i for i, word in enumerate(class_names)}

    def _one(item):
        path, word = item
        wave = gsc.read_wav(path, expected_rate=job.sample_rate)
        return backbone.extract_frames(wave), label_of[word]

    job.out_dir.mkdir(parents=True, exist_ok=True)
    split_files = {}
    for split_name, items in listing.items():
        if job.workers > 1:
            with ThreadPoolExecutor(max_workers=job.workers) as pool:
                records = list(pool.map(_one, items))
        else:
            records = [_one(item) for item in items]
        fname = f"{split_name}.eof1"
        write_eof1(records, job.out_dir / fname, d=backbone.d)
        split_files[split_name] = [fname]

    tag = backbone.tag + ("-random" if job.random_init else "")
    return write_manifest(job.out_dir / "manifest.json", class_names, backbone.d,
                          split_files, tag, backbone.param_count)
