"""Continual-learning metrics over the task accuracy matrix, plus the
moment-separation analysis.

The accuracy matrix A is lower-triangular: A[i][j] is the % accuracy on
test samples of task j measured right after learning task i.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .pooling import pooled_dim


class MetricError(ValueError):
    """Raised for malformed metric inputs."""


def _rows(acc_matrix) -> list[np.ndarray]:
    rows = [np.asarray(r, dtype=np.float64) for r in getattr(acc_matrix, "rows", acc_matrix)]
    if not rows:
        raise MetricError("accuracy matrix has no rows")
    for i, row in enumerate(rows):
        if row.size != i + 1:
            raise MetricError(f"row {i} must have {i + 1} entries, got {row.size}")
    return rows


def final_acc(acc_matrix, weights) -> float:
    """Test-count-weighted accuracy over all tasks at the final step."""
    rows = _rows(acc_matrix)
    last = rows[-1]
    w = np.asarray(weights, dtype=np.float64)
    if w.size != last.size:
        raise MetricError(f"need {last.size} task weights, got {w.size}")
    if w.sum() <= 0:
        raise MetricError("task weights must sum to a positive value")
    return float(last @ w / w.sum())


def plasticity(acc_matrix) -> float:
    """Mean accuracy on each task right after learning it (the diagonal)."""
    rows = _rows(acc_matrix)
    return float(np.mean([rows[k][k] for k in range(len(rows))]))


def forgetting(acc_matrix) -> float:
    """Mean over non-final tasks of best-previous minus final accuracy.

    Not clipped at zero: negative forgetting reports backward improvement.
    Zero for a single-task run.
    """
    rows = _rows(acc_matrix)
    k_tasks = len(rows)
    if k_tasks < 2:
        return 0.0
    last = rows[-1]
    gaps = []
    for k in range(k_tasks - 1):
        best_prev = max(rows[i][k] for i in range(k, k_tasks - 1))
        gaps.append(best_prev - last[k])
    return float(np.mean(gaps))


def backward_transfer(acc_matrix) -> float:
    """Mean final accuracy over all non-final tasks; zero for a single task."""
    rows = _rows(acc_matrix)
    if len(rows) < 2:
        return 0.0
    return float(np.mean(rows[-1][:-1]))


def relative_gain(acc1: float, acc2: float) -> float:
    """Improvement of acc2 over acc1 as a % of the remaining headroom."""
    if acc1 >= 100.0:
        raise MetricError("relative gain undefined at acc1 >= 100")
    return 100.0 * (acc2 - acc1) / (100.0 - acc1)


def wasserstein_1d(u, v) -> float:
    """Exact W1 between two 1-D empirical distributions.

    Equal-size inputs reduce to the mean absolute difference of the sorted
    samples; unequal sizes use the piecewise-constant CDF integral.
    """
    u = np.sort(np.asarray(u, dtype=np.float64).reshape(-1))
    v = np.sort(np.asarray(v, dtype=np.float64).reshape(-1))
    if u.size == 0 or v.size == 0:
        raise MetricError("wasserstein_1d needs non-empty samples")
    if u.size == v.size:
        return float(np.mean(np.abs(u - v)))
    support = np.sort(np.concatenate([u, v]))
    deltas = np.diff(support)
    u_cdf = np.searchsorted(u, support[:-1], side="right") / u.size
    v_cdf = np.searchsorted(v, support[:-1], side="right") / v.size
    return float(np.sum(np.abs(u_cdf - v_cdf) * deltas))


@dataclasses.dataclass(frozen=True)
class MomentSeparation:
    """Per moment order, the mean/std over class pairs of the dim-averaged
    W1 distance between per-class distributions of that moment block."""

    orders: tuple[int, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]
    num_pairs: int

    def as_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "mean": list(self.mean),
            "std": list(self.std),
            "num_pairs": self.num_pairs,
        }


def moment_separation(features_by_class: dict[int, np.ndarray], R: int) -> MomentSeparation:
    """Pairwise class separation of each moment block of pooled features.

    `features_by_class` maps a label to an (n_samples, R*d) array of
    moment-pooled vectors. A single class yields an empty report.
    """
    if R < 1:
        raise MetricError(f"R must be >= 1, got {R}")
    labels = sorted(features_by_class)
    groups = {}
    d = None
    for label in labels:
        arr = np.asarray(features_by_class[label], dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] % R != 0:
            raise MetricError(
                f"class {label}: expected (n, {R}*d) feature array, got shape {arr.shape}"
            )
        if d is None:
            d = arr.shape[1] // R
        elif arr.shape[1] // R != d:
            raise MetricError("inconsistent feature dimension across classes")
        groups[label] = arr

    pairs = [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]]
    if not pairs:
        return MomentSeparation(tuple(range(1, R + 1)), (), (), 0)

    means, stds = [], []
    for r in range(R):
        block = slice(r * d, (r + 1) * d)
        dists = []
        for a, b in pairs:
            per_dim = [
                wasserstein_1d(groups[a][:, block][:, j], groups[b][:, block][:, j])
                for j in range(d)
            ]
            dists.append(float(np.mean(per_dim)))
        means.append(float(np.mean(dists)))
        stds.append(float(np.std(dists)))
    return MomentSeparation(tuple(range(1, R + 1)), tuple(means), tuple(stds), len(pairs))


def delta_p(state_or_count, backbone_param_count: int) -> float:
    """Classifier parameter count as a % of the backbone's."""
    if backbone_param_count <= 0:
        raise MetricError("backbone_param_count must be positive")
    count = state_or_count.param_count() if hasattr(state_or_count, "param_count") else int(state_or_count)
    return 100.0 * count / backbone_param_count


def delta_fs(config, d: int, t_cap: int | None = None) -> float:
    """Pooled feature size as a multiple of the raw feature dimension."""
    return pooled_dim(config, d, t_cap) / d
