"""
Forgetting benchmark
====================

Runs the full online protocol for a grid of (pooler, learner) cells over
five class orderings and prints the continual-learning metrics: final
accuracy, backward transfer, forgetting, and plasticity.

The gradient-based baseline collapses onto the newest class (plasticity
near 100, heavy forgetting) while covariance-based learners keep earlier
words; moment pooling lifts the final accuracy further.
"""

import pathlib
import tempfile

from eocl.featio import SyntheticSpec, generate_synthetic
from eocl.pooling import PoolerConfig
from eocl.protocol import LearnerConfig, RunPlan, StreamOrder, run_suite

workdir = pathlib.Path(tempfile.mkdtemp())
spec = SyntheticSpec(num_classes=5, d=16, t_range=(20, 40),
                     samples_per_class={"train": 200, "test": 50},
                     seed=11, moment_contrast=0.5)
manifest = generate_synthetic(spec, workdir)

grid = [
    ("FT", PoolerConfig("AVG"), LearnerConfig("FT")),
    ("NCM", PoolerConfig("AVG"), LearnerConfig("NCM")),
    ("SLDA", PoolerConfig("AVG"), LearnerConfig("SLDA")),
    ("TAP-SLDA", PoolerConfig("TAP", R=5), LearnerConfig("SLDA")),
]

plans = [
    RunPlan(manifest=manifest, pooler=pool, learner=learn,
            order=StreamOrder.build("CLASS_IID", spec.num_classes, 0),
            num_orderings=5)
    for _, pool, learn in grid
]
report = run_suite(plans)

means = {(r.method, r.pooler): r for r in report.aggregates if r.ordering_seed == "mean"}
stds = {(r.method, r.pooler): r for r in report.aggregates if r.ordering_seed == "std"}

print(f"{'method':<10} {'Acc':>12} {'BwT':>7} {'Forg':>7} {'Pla':>7} {'dp%':>8} {'dfs':>5}")
for name, pool, learn in grid:
    m = means[(learn.tag, pool.tag)]
    s = stds[(learn.tag, pool.tag)]
    print(f"{name:<10} {m.acc:>7.1f}+/-{s.acc:<4.1f} {m.bwt:>7.1f} {m.forg:>7.1f} "
          f"{m.pla:>7.1f} {m.delta_p:>8.3f} {m.delta_fs:>5.1f}")
