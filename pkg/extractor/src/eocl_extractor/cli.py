"""Command-line entry point for feature extraction."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backbones import BACKBONE_TAGS, BackboneError
from .extract import DATASET_KINDS, ExtractionJob, extract
from .gsc import DatasetError
from .mswc import build_mswc_micro


def _build_parser():
    parser = argparse.ArgumentParser(prog="eocl-extract",
                                     description="Export frame features into EOF1 containers")
    sub = parser.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract", help="run a backbone over a dataset split")
    ext.add_argument("--dataset-kind", choices=DATASET_KINDS, required=True)
    ext.add_argument("--dataset-root", type=Path, required=True)
    ext.add_argument("--backbone", choices=BACKBONE_TAGS, required=True)
    ext.add_argument("--split", default="all")
    ext.add_argument("--out", type=Path, required=True)
    ext.add_argument("--random-init", action="store_true")
    ext.add_argument("--layer", type=int, default=-1)
    ext.add_argument("--workers", type=int, default=1)
    ext.add_argument("--seed", type=int, default=0)
    ext.add_argument("--language", default=None)
    ext.add_argument("--n-words", type=int, default=None)

    micro = sub.add_parser("build-mswc-micro", help="build micro-set file lists")
    micro.add_argument("--splits-csv", type=Path, required=True)
    micro.add_argument("--n-words", type=int, required=True)
    micro.add_argument("--seed", type=int, default=0)
    micro.add_argument("--out", type=Path, required=True)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    try:
        if args.command == "extract":
            job = ExtractionJob(
                dataset_root=args.dataset_root, dataset_kind=args.dataset_kind,
                backbone=args.backbone, out_dir=args.out, split=args.split,
                random_init=args.random_init, layer=args.layer,
                language=args.language, n_words=args.n_words,
                seed=args.seed, workers=args.workers,
            )
            manifest = extract(job)
            print(manifest)
        else:
            micro = build_mswc_micro(args.splits_csv, args.n_words, seed=args.seed)
            args.out.write_text(json.dumps(micro, indent=2, sort_keys=True) + "\n")
            print(args.out)
        return 0
    except (DatasetError, BackboneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
