"""
Tour of the pooling operators
=============================

Pools one variable-length utterance with every operator and compares
output sizes against the raw feature dimension.
"""

import numpy as np

from eocl.pooling import PoolerConfig, make_pooler, pooled_dim

rng = np.random.default_rng(0)
t, d = 37, 8
utterance = rng.standard_normal((t, d)) * np.linspace(0.5, 2.0, d)

configs = [
    PoolerConfig("AVG"),
    PoolerConfig("MAX"),
    PoolerConfig("MIX", alpha=0.5),
    PoolerConfig("STOCH", rng_seed=7),
    PoolerConfig("LP", p=2),
    PoolerConfig("RAP", k_frac=0.1, t_cap=40),
    PoolerConfig("AVGMAX"),
    PoolerConfig("TSDP"),
    PoolerConfig("TSTP"),
    PoolerConfig("MAXW", l=2),
    PoolerConfig("FLAT", t_cap=40),
    PoolerConfig("ISQRT_COV", newton_iters=5),
    PoolerConfig("TAP", R=5),
]

print(f"input: t={t} frames, d={d} dims\n")
print(f"{'pooler':<12} {'output dim':>10} {'size multiplier':>16}   first entries")
for config in configs:
    pooler = make_pooler(config)
    vec = pooler(utterance)
    mult = pooled_dim(config, d) / d
    head = np.array2string(vec.values[:4], precision=3, suppress_small=True)
    print(f"{config.tag:<12} {vec.values.size:>10} {mult:>16.2f}   {head}")

# The first R*d entries of TAP are the mean block, the std block, then the
# standardized moments; mean and std alone reproduce TSTP.
tap = make_pooler(PoolerConfig("TAP", R=5))(utterance).values
tstp = make_pooler(PoolerConfig("TSTP"))(utterance).values
print("\nTAP blocks 1-2 equal TSTP exactly:", np.array_equal(tap[: 2 * d], tstp))
