"""Command-line entry point.

Subcommands: gen-synth, run, inspect, analyze-moments. Exit codes form a
stable contract: 0 success, 1 config error, 2 runtime error. The env var
EOCL_SEED overrides the base seed of gen-synth and run.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .featio import (ContainerFormatError, ManifestError, SyntheticSpec,
                     generate_synthetic, load_manifest, read_container)
from .learners import LearnerError
from .metrics import moment_separation
from .pooling import PoolerConfig, PoolingError, tap_pool
from .protocol import LearnerConfig, ProtocolError, RunPlan, StreamOrder, run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

REPORT_COLUMNS = ("method", "pooler", "dataset", "ordering_seed",
                  "acc", "bwt", "forg", "pla", "delta_p", "delta_fs")


class ConfigError(ValueError):
    pass


def _env_seed(default: int) -> int:
    raw = os.environ.get("EOCL_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"EOCL_SEED must be an integer, got {raw!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eocl",
                                     description="Streaming continual-learning harness")
    parser.add_argument("--version", action="version", version=f"eocl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-synth", help="generate a synthetic dataset")
    gen.add_argument("--classes", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--t-min", type=int, default=20)
    gen.add_argument("--t-max", type=int, default=40)
    gen.add_argument("--train-per-class", type=int, default=200)
    gen.add_argument("--dev-per-class", type=int, default=50)
    gen.add_argument("--test-per-class", type=int, default=50)
    gen.add_argument("--moment-contrast", type=float, default=0.0)
    gen.add_argument("--out", type=Path, required=True)

    run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--output", type=Path, default=None)
    run.add_argument("--format", choices=("csv", "json"), default=None)
    run.add_argument("--num-orderings", type=int, default=None)
    run.add_argument("--jobs", type=int, default=1)

    ins = sub.add_parser("inspect", help="summarize an EOF1 container")
    ins.add_argument("container", type=Path)

    ana = sub.add_parser("analyze-moments", help="pairwise moment separation of a split")
    ana.add_argument("--manifest", type=Path, required=True)
    ana.add_argument("--split", default="train")
    ana.add_argument("--r", type=int, default=5)
    ana.add_argument("--output", type=Path, default=None)

    return parser


def cmd_gen_synth(args) -> int:
    spec = SyntheticSpec(
        num_classes=args.classes,
        d=args.d,
        t_range=(args.t_min, args.t_max),
        samples_per_class={
            "train": args.train_per_class,
            "dev": args.dev_per_class,
            "test": args.test_per_class,
        },
        seed=_env_seed(args.seed),
        moment_contrast=args.moment_contrast,
    )
    generate_synthetic(spec, args.out)
    print(args.out / "manifest.json")
    return EXIT_OK


def _parse_run_config(args) -> dict:
    try:
        doc = json.loads(args.config.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc

    for key in ("manifest", "poolers", "learners"):
        if key not in doc:
            raise ConfigError(f"config missing key {key!r}")

    resolved = {
        "manifest": str(doc["manifest"]),
        "poolers": doc["poolers"],
        "learners": doc["learners"],
        "stream": doc.get("stream", "class_iid"),
        "num_orderings": int(doc.get("num_orderings", 5)),
        "seed": int(doc.get("seed", 0)),
        "output": doc.get("output", "report.csv"),
        "format": doc.get("format", "csv"),
        "train_split": doc.get("train_split", "train"),
        "eval_split": doc.get("eval_split", "test"),
    }
    if args.seed is not None:
        resolved["seed"] = args.seed
    resolved["seed"] = _env_seed(resolved["seed"])
    if args.num_orderings is not None:
        resolved["num_orderings"] = args.num_orderings
    if args.output is not None:
        resolved["output"] = str(args.output)
    if args.format is not None:
        resolved["format"] = args.format
    if resolved["format"] not in ("csv", "json"):
        raise ConfigError(f"unknown report format {resolved['format']!r}")
    return resolved


def _build_plans(resolved: dict, config_dir: Path) -> list[RunPlan]:
    manifest_path = Path(resolved["manifest"])
    if not manifest_path.is_absolute():
        manifest_path = config_dir / manifest_path
    try:
        manifest = load_manifest(manifest_path)
    except ManifestError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        poolers = [PoolerConfig(**p) for p in resolved["poolers"]]
    except (TypeError, PoolingError) as exc:
        raise ConfigError(f"bad pooler config: {exc}") from exc

    learners = []
    for entry in resolved["learners"]:
        entry = dict(entry)
        try:
            kind = entry.pop("kind")
        except KeyError as exc:
            raise ConfigError("learner config missing 'kind'") from exc
        learners.append(LearnerConfig(kind=kind, hyperparams=entry))

    try:
        order = StreamOrder.build(resolved["stream"], manifest.num_classes, resolved["seed"])
        plans = [
            RunPlan(manifest=manifest, pooler=pool, learner=learn, order=order,
                    train_split=resolved["train_split"], eval_split=resolved["eval_split"],
                    num_orderings=resolved["num_orderings"])
            for pool in poolers
            for learn in learners
        ]
    except ProtocolError as exc:
        raise ConfigError(str(exc)) from exc

    # Fail before any run on unknown learner kinds or bad hyperparameters.
    for learn in learners:
        try:
            learn.build(1)
        except (LearnerError, TypeError) as exc:
            raise ConfigError(f"bad learner config {learn.tag}: {exc}") from exc
    return plans


def _format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _write_report(report, resolved: dict, path: Path) -> None:
    rows = [r.as_dict() for r in report.rows]
    aggregates = [r.as_dict() for r in report.aggregates]
    if resolved["format"] == "json":
        doc = {
            "version": __version__,
            "config": resolved,
            "rows": rows,
            "aggregates": aggregates,
            "errors": report.errors,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return

    with open(path, "w", newline="") as fh:
        fh.write(f"# eocl {__version__}\n")
        fh.write(f"# config: {json.dumps(resolved, sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in rows + aggregates:
            writer.writerow([_format_value(row[c]) for c in REPORT_COLUMNS])


def cmd_run(args) -> int:
    resolved = _parse_run_config(args)
    plans = _build_plans(resolved, args.config.parent.resolve())
    report = run_suite(plans, jobs=max(1, args.jobs))
    out_path = Path(resolved["output"])
    _write_report(report, resolved, out_path)
    print(out_path)
    if report.errors:
        for err in report.errors:
            print(f"error: {err['method']}/{err['pooler']} seed {err['ordering_seed']}: "
                  f"{err['error']}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_inspect(args) -> int:
    records = read_container(args.container)
    t_hist = Counter(seq.t for seq, _ in records)
    label_hist = Counter(label for _, label in records)
    d = records[0][0].d if records else 0
    print(f"records: {len(records)}")
    print(f"d: {d}")
    print("t histogram:")
    for t in sorted(t_hist):
        print(f"  t={t}: {t_hist[t]}")
    print("label histogram:")
    for label in sorted(label_hist):
        print(f"  label={label}: {label_hist[label]}")
    return EXIT_OK


def cmd_analyze_moments(args) -> int:
    manifest = load_manifest(args.manifest)
    records = manifest.load_split(args.split)
    by_class: dict[int, list[np.ndarray]] = {}
    for seq, label in records:
        by_class.setdefault(label, []).append(tap_pool(seq, args.r).values)
    grouped = {label: np.stack(vecs) for label, vecs in by_class.items()}
    sep = moment_separation(grouped, args.r)

    doc = sep.as_dict()
    if args.output is not None:
        args.output.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"class pairs: {sep.num_pairs}")
    for r, mean, std in zip(sep.orders, sep.mean, sep.std):
        print(f"moment {r}: W1 {mean:.6f} +/- {std:.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map that onto the config-error code.
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK

    handlers = {
        "gen-synth": cmd_gen_synth,
        "run": cmd_run,
        "inspect": cmd_inspect,
        "analyze-moments": cmd_analyze_moments,
    }
    try:
        return handlers[args.command](args)
    except ContainerFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ManifestError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
