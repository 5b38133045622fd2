"""
On-demand full-scale check (not part of CI): export real speech-commands
features with one pretrained base backbone, then verify that moment
pooling beats average pooling for the shared-covariance learner.

Needs the speech-commands v2 directory tree and network access for the
checkpoint download. Expect roughly an hour of CPU extraction.

    python scripts/gsc_tap_vs_avg.py --dataset-root /data/speech_commands_v0.02 \
        --backbone w2v2-base --out /data/gsc_features
"""

import argparse
from pathlib import Path

from eocl.featio import load_manifest
from eocl.metrics import final_acc
from eocl.pooling import PoolerConfig
from eocl.protocol import LearnerConfig, RunPlan, StreamOrder, run_online

from eocl_extractor.extract import ExtractionJob, extract


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--dataset-root", type=Path, required=True)
    parser.add_argument("--backbone", default="w2v2-base")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--skip-extract", action="store_true",
                        help="reuse an existing manifest under --out")
    args = parser.parse_args()

    if args.skip_extract:
        manifest_path = args.out / "manifest.json"
    else:
        job = ExtractionJob(dataset_root=args.dataset_root, dataset_kind="gsc",
                            backbone=args.backbone, out_dir=args.out,
                            workers=args.workers)
        manifest_path = extract(job)
    manifest = load_manifest(manifest_path)
    print(f"features: d={manifest.d}, {manifest.num_classes} classes, "
          f"backbone {manifest.backbone_tag}")

    train = manifest.load_split("train")
    test = manifest.load_split("test")
    accs = {}
    for name, pooler in (("AVG-SLDA", PoolerConfig("AVG")),
                         ("TAP-SLDA", PoolerConfig("TAP", R=5))):
        plan = RunPlan(manifest=manifest, pooler=pooler, learner=LearnerConfig("SLDA"),
                       order=StreamOrder.build("CLASS_IID", manifest.num_classes, 0),
                       num_orderings=1)
        result = run_online(plan, train_records=train, eval_records=test)
        accs[name] = final_acc(result.matrix, result.eval_weights)
        print(f"{name}: final Acc {accs[name]:.1f}")

    assert accs["TAP-SLDA"] > accs["AVG-SLDA"], "moment pooling should win on real features"
    print("direction confirmed: TAP-SLDA > AVG-SLDA")


if __name__ == "__main__":
    main()
