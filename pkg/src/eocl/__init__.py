"""Streaming continual-learning engine and benchmark harness for online
keyword spotting: moment pooling, one-sample-at-a-time classifiers, and
forgetting metrics."""

__version__ = "0.1.0"

from .featio import (DatasetManifest, FeatureSequence, SyntheticSpec,
                     generate_synthetic, load_manifest, read_container,
                     save_manifest, write_container)
from .learners import LEARNER_KINDS, Learner, deserialize, make_learner, serialize
from .metrics import (MomentSeparation, backward_transfer, delta_fs, delta_p,
                      final_acc, forgetting, moment_separation, plasticity,
                      relative_gain, wasserstein_1d)
from .pooling import (PooledVector, Pooler, PoolerConfig, avg_pool,
                      avgmax_pool, flat_pool, isqrt_cov_pool, lp_pool,
                      make_pooler, max_pool, maxw_pool, mix_pool, pooled_dim,
                      rap_pool, stoch_pool, tap_pool, tsdp_pool, tstp_pool)
from .protocol import (AccMatrix, LearnerConfig, RunPlan, StreamOrder,
                       build_stream, run_online, run_suite)

__all__ = [name for name in dir() if not name.startswith("_")]
