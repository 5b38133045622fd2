"""
One sample at a time
====================

Feeds a class-ordered stream to several streaming classifiers and prints
the running test accuracy after every class finishes. No sample is ever
revisited; each learner keeps only bounded state.
"""

import pathlib
import tempfile

import numpy as np

from eocl.featio import SyntheticSpec, generate_synthetic
from eocl.learners import make_learner
from eocl.pooling import PoolerConfig, make_pooler

workdir = pathlib.Path(tempfile.mkdtemp())
spec = SyntheticSpec(num_classes=4, d=8, t_range=(15, 30),
                     samples_per_class={"train": 120, "test": 40},
                     seed=3, moment_contrast=0.4)
manifest = generate_synthetic(spec, workdir)
train = manifest.load_split("train")
test = manifest.load_split("test")

pooler = make_pooler(PoolerConfig("TAP", R=5))
dim = pooler.dim(manifest.d)

learners = {name: make_learner(name, dim) for name in ("NCM", "SLDA", "SNB", "PRCP")}

# class-ordered stream: the hardest case, one new word per task
stream = sorted(range(len(train)), key=lambda i: train[i][1])
pooled_test = [(pooler(seq).values, label) for seq, label in test]

print(f"stream of {len(stream)} samples, {manifest.num_classes} classes, "
      f"pooled dim {dim}\n")
print(f"{'after class':<12}" + "".join(f"{name:>8}" for name in learners))
current = None
for pos, idx in enumerate(stream):
    seq, label = train[idx]
    vec = pooler(seq).values
    for learner in learners.values():
        learner.fit_one(vec, label)
    last = pos == len(stream) - 1
    if last or train[stream[pos + 1]][1] != label:
        line = f"{manifest.class_names[label]:<12}"
        for learner in learners.values():
            acc = np.mean([learner.predict(v) == y for v, y in pooled_test]) * 100
            line += f"{acc:>8.1f}"
        print(line)

print("\nstate sizes (stored scalars):")
for name, learner in learners.items():
    print(f"  {name:<6} {learner.param_count():>8}")
