"""Streaming classifiers: learn from one labeled vector at a time.

Every learner keeps bounded state (a function of input dim, classes seen,
and buffer capacity, never of the stream length), exposes `fit_one`,
`scores`, `predict`, and `param_count`, and round-trips through
`serialize`/`deserialize`. Argmax ties always resolve to the lowest class
label.
"""

from __future__ import annotations

import json
import struct

import numpy as np

LEARNER_KINDS = ("FT", "PRCP", "NCM", "CBCL", "SOVR", "SNB", "SLDA", "SQDA", "ICARL")

_SER_MAGIC = b"EOCL"
_SER_VERSION = 1
_SER_HEAD = struct.Struct("<4sHI")


class LearnerError(ValueError):
    """Raised for invalid learner inputs or corrupt serialized state."""


def _euclidean(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


class Learner:
    """Base streaming classifier over fixed-dimension vectors."""

    kind = ""

    def __init__(self, dim: int):
        if dim < 1:
            raise LearnerError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.samples_seen = 0
        self._seen_order: list[int] = []

    # -- stream API --

    def fit_one(self, x, y: int) -> None:
        vec = self._check_input(x)
        y = int(y)
        if y < 0:
            raise LearnerError(f"labels must be non-negative, got {y}")
        if y not in self._seen_order:
            self._seen_order.append(y)
        self._update(vec, y)
        self.samples_seen += 1

    def scores(self, x) -> np.ndarray:
        """Per-class scores, ordered by ascending class label."""
        if not self._seen_order:
            raise LearnerError("no classes seen yet")
        vec = self._check_input(x)
        return np.array([self._score(vec, label) for label in self.class_labels()])

    def predict(self, x) -> int:
        labels = self.class_labels()
        return labels[int(np.argmax(self.scores(x)))]

    def class_labels(self) -> list[int]:
        return sorted(self._seen_order)

    @property
    def classes_seen(self) -> list[int]:
        """Labels in order of first appearance."""
        return list(self._seen_order)

    # -- kind-specific hooks --

    def _update(self, x: np.ndarray, y: int) -> None:
        raise NotImplementedError

    def _score(self, x: np.ndarray, label: int) -> float:
        raise NotImplementedError

    def param_count(self) -> int:
        raise NotImplementedError

    # -- helpers --

    def _check_input(self, x) -> np.ndarray:
        vec = np.asarray(getattr(x, "values", x), dtype=np.float64).reshape(-1)
        if vec.size != self.dim:
            raise LearnerError(f"input dim {vec.size} does not match learner dim {self.dim}")
        if not np.all(np.isfinite(vec)):
            raise LearnerError("non-finite values in learner input")
        return vec

    # -- serialization hooks --

    def _payload(self) -> tuple[dict, dict[str, np.ndarray]]:
        raise NotImplementedError

    def _restore(self, meta: dict, arrays: dict[str, np.ndarray]) -> None:
        raise NotImplementedError

    def _base_meta(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "samples_seen": self.samples_seen,
            "seen_order": self._seen_order,
        }


def _running_mean_update(mu: np.ndarray, count: int, x: np.ndarray) -> np.ndarray:
    return (count * mu + x) / (count + 1)


class NcmLearner(Learner):
    """Nearest class mean: one running centroid per class."""

    kind = "NCM"

    def __init__(self, dim: int):
        super().__init__(dim)
        self.mu: dict[int, np.ndarray] = {}
        self.counts: dict[int, int] = {}

    def _update(self, x, y):
        if y not in self.mu:
            self.mu[y] = x.copy()
            self.counts[y] = 1
        else:
            self.mu[y] = _running_mean_update(self.mu[y], self.counts[y], x)
            self.counts[y] += 1

    def _score(self, x, label):
        return -_euclidean(x, self.mu[label])

    def param_count(self):
        k = len(self.mu)
        return k * self.dim + k

    def _payload(self):
        meta = self._base_meta()
        meta["counts"] = {str(k): v for k, v in self.counts.items()}
        arrays = {f"mu_{k}": v for k, v in self.mu.items()}
        return meta, arrays

    def _restore(self, meta, arrays):
        self.counts = {int(k): int(v) for k, v in meta["counts"].items()}
        self.mu = {k: arrays[f"mu_{k}"] for k in self.counts}


class SldaLearner(Learner):
    """Per-class running means plus one shared streaming covariance;
    linear discriminant scoring with shrinkage toward the identity."""

    kind = "SLDA"

    def __init__(self, dim: int, epsilon: float = 1e-4):
        super().__init__(dim)
        self.epsilon = float(epsilon)
        self.mu: dict[int, np.ndarray] = {}
        self.counts: dict[int, int] = {}
        self.sigma = np.zeros((dim, dim))
        self.updates = 0
        self._cache: tuple[list[int], np.ndarray, np.ndarray] | None = None

    def _update(self, x, y):
        if y not in self.mu:
            # A fresh class contributes nothing to the covariance: its mean
            # is initialized at the sample itself.
            self.mu[y] = x.copy()
            self.counts[y] = 0
        diff = x - self.mu[y]
        n = self.updates
        delta = np.outer(diff, diff) * (n / (n + 1.0))
        self.sigma = (n * self.sigma + delta) / (n + 1.0)
        self.mu[y] = _running_mean_update(self.mu[y], self.counts[y], x)
        self.counts[y] += 1
        self.updates = n + 1
        self._cache = None

    def _precision(self) -> np.ndarray:
        base = (1.0 - self.epsilon) * self.sigma + self.epsilon * np.eye(self.dim)
        jitter = 0.0
        while True:
            try:
                np.linalg.cholesky(base + jitter * np.eye(self.dim))
                return np.linalg.inv(base + jitter * np.eye(self.dim))
            except np.linalg.LinAlgError:
                if jitter == 0.0:
                    jitter = 1e-6
                elif jitter >= 1e-2:
                    raise LearnerError("covariance not factorizable even at max jitter")
                else:
                    jitter *= 10.0

    def _refresh_cache(self):
        labels = self.class_labels()
        lam = self._precision()
        means = np.stack([self.mu[k] for k in labels])
        w = means @ lam
        bias = -0.5 * np.einsum("ij,ij->i", w, means)
        self._cache = (labels, w, bias)

    def scores(self, x):
        if not self._seen_order:
            raise LearnerError("no classes seen yet")
        vec = self._check_input(x)
        if self._cache is None or self._cache[0] != self.class_labels():
            self._refresh_cache()
        _, w, bias = self._cache
        return w @ vec + bias

    def _score(self, x, label):
        idx = self.class_labels().index(label)
        return float(self.scores(x)[idx])

    def param_count(self):
        k = len(self.mu)
        return k * self.dim + k + self.dim * self.dim

    def _payload(self):
        meta = self._base_meta()
        meta["epsilon"] = self.epsilon
        meta["updates"] = self.updates
        meta["counts"] = {str(k): v for k, v in self.counts.items()}
        arrays = {f"mu_{k}": v for k, v in self.mu.items()}
        arrays["sigma"] = self.sigma
        return meta, arrays

    def _restore(self, meta, arrays):
        self.epsilon = float(meta["epsilon"])
        self.updates = int(meta["updates"])
        self.counts = {int(k): int(v) for k, v in meta["counts"].items()}
        self.mu = {k: arrays[f"mu_{k}"] for k in self.counts}
        self.sigma = arrays["sigma"]
        self._cache = None


class _WelfordGaussianLearner(Learner):
    """Shared structure for SQDA/SNB: per-class Welford moment tracking."""

    def __init__(self, dim: int):
        super().__init__(dim)
        self.mu: dict[int, np.ndarray] = {}
        self.counts: dict[int, int] = {}
        self.m2: dict[int, np.ndarray] = {}

    def _welford(self, x, y, second_moment_shape):
        if y not in self.mu:
            self.mu[y] = np.zeros(self.dim)
            self.counts[y] = 0
            self.m2[y] = np.zeros(second_moment_shape)
        self.counts[y] += 1
        d1 = x - self.mu[y]
        self.mu[y] += d1 / self.counts[y]
        d2 = x - self.mu[y]
        return d1, d2


class SqdaLearner(_WelfordGaussianLearner):
    """Quadratic discriminant: one full covariance per class, Welford-updated."""

    kind = "SQDA"

    def __init__(self, dim: int, epsilon: float = 1e-4):
        super().__init__(dim)
        self.epsilon = float(epsilon)

    def _update(self, x, y):
        d1, d2 = self._welford(x, y, (self.dim, self.dim))
        self.m2[y] += np.outer(d1, d2)

    def covariance(self, label: int) -> np.ndarray:
        m2 = self.m2[label]
        return (m2 + m2.T) / (2.0 * self.counts[label])

    def _score(self, x, label):
        c = self.counts[label]
        total = sum(self.counts.values())
        if c < self.dim + 1:
            # Too few samples for a usable covariance estimate.
            cov = self.epsilon * np.eye(self.dim)
        else:
            cov = self.covariance(label) + self.epsilon * np.eye(self.dim)
        diff = x - self.mu[label]
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise LearnerError(f"class {label} covariance is not positive definite")
        maha = float(diff @ np.linalg.solve(cov, diff))
        return float(np.log(c / total) - 0.5 * logdet - 0.5 * maha)

    def param_count(self):
        k = len(self.mu)
        return k * self.dim + k + k * self.dim * self.dim

    def _payload(self):
        meta = self._base_meta()
        meta["epsilon"] = self.epsilon
        meta["counts"] = {str(k): v for k, v in self.counts.items()}
        arrays = {}
        for k in self.counts:
            arrays[f"mu_{k}"] = self.mu[k]
            arrays[f"m2_{k}"] = self.m2[k]
        return meta, arrays

    def _restore(self, meta, arrays):
        self.epsilon = float(meta["epsilon"])
        self.counts = {int(k): int(v) for k, v in meta["counts"].items()}
        self.mu = {k: arrays[f"mu_{k}"] for k in self.counts}
        self.m2 = {k: arrays[f"m2_{k}"] for k in self.counts}


class SnbLearner(_WelfordGaussianLearner):
    """Gaussian naive Bayes with per-class running variance vectors."""

    kind = "SNB"

    def __init__(self, dim: int, variance_floor: float = 1e-8):
        super().__init__(dim)
        self.variance_floor = float(variance_floor)

    def _update(self, x, y):
        d1, d2 = self._welford(x, y, (self.dim,))
        self.m2[y] += d1 * d2

    def variances(self, label: int) -> np.ndarray:
        return self.m2[label] / self.counts[label]

    def _score(self, x, label):
        c = self.counts[label]
        total = sum(self.counts.values())
        var = np.maximum(self.variances(label), self.variance_floor)
        diff = x - self.mu[label]
        loglik = -0.5 * float(np.sum(np.log(2.0 * np.pi * var) + diff * diff / var))
        return float(np.log(c / total)) + loglik

    def param_count(self):
        k = len(self.mu)
        return 2 * k * self.dim + k

    def _payload(self):
        meta = self._base_meta()
        meta["variance_floor"] = self.variance_floor
        meta["counts"] = {str(k): v for k, v in self.counts.items()}
        arrays = {}
        for k in self.counts:
            arrays[f"mu_{k}"] = self.mu[k]
            arrays[f"m2_{k}"] = self.m2[k]
        return meta, arrays

    def _restore(self, meta, arrays):
        self.variance_floor = float(meta["variance_floor"])
        self.counts = {int(k): int(v) for k, v in meta["counts"].items()}
        self.mu = {k: arrays[f"mu_{k}"] for k in self.counts}
        self.m2 = {k: arrays[f"m2_{k}"] for k in self.counts}


class PrcpLearner(Learner):
    """Online perceptron: one weight vector per class, updated on mistakes."""

    kind = "PRCP"

    def __init__(self, dim: int):
        super().__init__(dim)
        self.w: dict[int, np.ndarray] = {}

    def _update(self, x, y):
        if y not in self.w:
            self.w[y] = x.copy()
            return
        predicted = self.predict(x)
        if predicted != y:
            self.w[y] = self.w[y] + x
            self.w[predicted] = self.w[predicted] - x

    def _score(self, x, label):
        return float(self.w[label] @ x)

    def param_count(self):
        return len(self.w) * self.dim

    def _payload(self):
        meta = self._base_meta()
        meta["labels"] = sorted(self.w)
        return meta, {f"w_{k}": v for k, v in self.w.items()}

    def _restore(self, meta, arrays):
        self.w = {int(k): arrays[f"w_{k}"] for k in meta["labels"]}


class SovrLearner(Learner):
    """One-vs-rest by contrasting each class mean against the mean of all
    other samples, scored by a dot product."""

    kind = "SOVR"

    def __init__(self, dim: int):
        super().__init__(dim)
        self.mu: dict[int, np.ndarray] = {}
        self.counts: dict[int, int] = {}
        self.global_mu = np.zeros(dim)
        self.total = 0

    def _update(self, x, y):
        if y not in self.mu:
            self.mu[y] = x.copy()
            self.counts[y] = 1
        else:
            self.mu[y] = _running_mean_update(self.mu[y], self.counts[y], x)
            self.counts[y] += 1
        self.global_mu = _running_mean_update(self.global_mu, self.total, x)
        self.total += 1

    def _score(self, x, label):
        c = self.counts[label]
        if self.total == c:
            rest = np.zeros(self.dim)
        else:
            rest = (self.total * self.global_mu - c * self.mu[label]) / (self.total - c)
        return float((self.mu[label] - rest) @ x)

    def param_count(self):
        k = len(self.mu)
        return k * self.dim + k + self.dim

    def _payload(self):
        meta = self._base_meta()
        meta["total"] = self.total
        meta["counts"] = {str(k): v for k, v in self.counts.items()}
        arrays = {f"mu_{k}": v for k, v in self.mu.items()}
        arrays["global_mu"] = self.global_mu
        return meta, arrays

    def _restore(self, meta, arrays):
        self.total = int(meta["total"])
        self.counts = {int(k): int(v) for k, v in meta["counts"].items()}
        self.mu = {k: arrays[f"mu_{k}"] for k in self.counts}
        self.global_mu = arrays["global_mu"]


class CbclLearner(Learner):
    """Multi-centroid nearest neighbor with class weights inversely
    proportional to per-class sample totals. With the default infinite
    merge threshold it keeps exactly one centroid per class."""

    kind = "CBCL"

    def __init__(self, dim: int, distance_threshold: float = np.inf):
        super().__init__(dim)
        self.distance_threshold = float(distance_threshold)
        self.centroids: dict[int, list[np.ndarray]] = {}
        self.centroid_counts: dict[int, list[int]] = {}
        self.totals: dict[int, int] = {}

    def _update(self, x, y):
        self.totals[y] = self.totals.get(y, 0) + 1
        if y not in self.centroids:
            self.centroids[y] = [x.copy()]
            self.centroid_counts[y] = [1]
            return
        dists = [_euclidean(x, c) for c in self.centroids[y]]
        best = int(np.argmin(dists))
        if dists[best] <= self.distance_threshold:
            n = self.centroid_counts[y][best]
            self.centroids[y][best] = _running_mean_update(self.centroids[y][best], n, x)
            self.centroid_counts[y][best] = n + 1
        else:
            self.centroids[y].append(x.copy())
            self.centroid_counts[y].append(1)

    def _score(self, x, label):
        best = max(-_euclidean(x, c) for c in self.centroids[label])
        return best / self.totals[label]

    def param_count(self):
        stored = sum(len(cs) * (self.dim + 1) for cs in self.centroids.values())
        return stored + len(self.totals)

    def _payload(self):
        meta = self._base_meta()
        meta["distance_threshold"] = (
            "inf" if np.isinf(self.distance_threshold) else self.distance_threshold
        )
        meta["totals"] = {str(k): v for k, v in self.totals.items()}
        meta["centroid_counts"] = {str(k): v for k, v in self.centroid_counts.items()}
        arrays = {f"cent_{k}": np.stack(v) for k, v in self.centroids.items()}
        return meta, arrays

    def _restore(self, meta, arrays):
        thr = meta["distance_threshold"]
        self.distance_threshold = np.inf if thr == "inf" else float(thr)
        self.totals = {int(k): int(v) for k, v in meta["totals"].items()}
        self.centroid_counts = {
            int(k): [int(n) for n in v] for k, v in meta["centroid_counts"].items()
        }
        self.centroids = {k: list(arrays[f"cent_{k}"]) for k in self.totals}


class FtLearner(Learner):
    """Single linear layer trained by one SGD step per sample on softmax
    cross-entropy; no forgetting mitigation."""

    kind = "FT"

    def __init__(self, dim: int, lr: float = 0.01):
        super().__init__(dim)
        self.lr = float(lr)
        self.w = np.zeros((0, dim))
        self.b = np.zeros(0)
        self.row_of: dict[int, int] = {}

    def _ensure_row(self, y: int):
        if y not in self.row_of:
            self.row_of[y] = self.w.shape[0]
            self.w = np.vstack([self.w, np.zeros((1, self.dim))])
            self.b = np.append(self.b, 0.0)

    def _softmax(self, logits: np.ndarray) -> np.ndarray:
        shifted = logits - logits.max()
        e = np.exp(shifted)
        return e / e.sum()

    def _gradient_step(self, batch: list[tuple[np.ndarray, int]]):
        grad_w = np.zeros_like(self.w)
        grad_b = np.zeros_like(self.b)
        for vec, label in batch:
            probs = self._softmax(self.w @ vec + self.b)
            probs[self.row_of[label]] -= 1.0
            grad_w += np.outer(probs, vec)
            grad_b += probs
        scale = self.lr / len(batch)
        self.w -= scale * grad_w
        self.b -= scale * grad_b

    def _update(self, x, y):
        self._ensure_row(y)
        self._gradient_step([(x, y)])

    def _score(self, x, label):
        row = self.row_of[label]
        return float(self.w[row] @ x + self.b[row])

    def scores(self, x):
        if not self._seen_order:
            raise LearnerError("no classes seen yet")
        vec = self._check_input(x)
        logits = self.w @ vec + self.b
        return np.array([logits[self.row_of[k]] for k in self.class_labels()])

    def param_count(self):
        return self.w.shape[0] * (self.dim + 1)

    def _payload(self):
        meta = self._base_meta()
        meta["lr"] = self.lr
        meta["row_of"] = {str(k): v for k, v in self.row_of.items()}
        return meta, {"w": self.w, "b": self.b}

    def _restore(self, meta, arrays):
        self.lr = float(meta["lr"])
        self.row_of = {int(k): int(v) for k, v in meta["row_of"].items()}
        self.w = arrays["w"].reshape(-1, self.dim)
        self.b = arrays["b"].reshape(-1)


class IcarlLearner(FtLearner):
    """Linear head plus a class-balanced replay buffer: each step pairs the
    new sample with one random buffered sample, and insertion evicts a random
    member of the most-represented class once the buffer is full."""

    kind = "ICARL"

    def __init__(self, dim: int, lr: float = 0.01, buffer_capacity: int = 1000, seed: int = 0):
        super().__init__(dim, lr)
        self.buffer_capacity = int(buffer_capacity)
        self.seed = int(seed)
        self.rng = np.random.default_rng(np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF]))
        self.buffer: list[tuple[np.ndarray, int]] = []
        self.replay_reads = 0

    def _buffer_class_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for _, label in self.buffer:
            counts[label] = counts.get(label, 0) + 1
        return counts

    def _update(self, x, y):
        self._ensure_row(y)
        batch = [(x, y)]
        if self.buffer:
            pick = int(self.rng.integers(len(self.buffer)))
            batch.append(self.buffer[pick])
            self.replay_reads += 1
        self._gradient_step(batch)
        self._insert(x, y)

    def _insert(self, x, y):
        if self.buffer_capacity == 0:
            return
        if len(self.buffer) >= self.buffer_capacity:
            counts = self._buffer_class_counts()
            top = max(counts.values())
            victim_class = min(k for k, v in counts.items() if v == top)
            candidates = [i for i, (_, lab) in enumerate(self.buffer) if lab == victim_class]
            evict = candidates[int(self.rng.integers(len(candidates)))]
            self.buffer.pop(evict)
        self.buffer.append((x.copy(), y))

    def param_count(self):
        return super().param_count() + len(self.buffer) * (self.dim + 1)

    def _payload(self):
        meta, arrays = super()._payload()
        meta["buffer_capacity"] = self.buffer_capacity
        meta["seed"] = self.seed
        meta["replay_reads"] = self.replay_reads
        meta["rng_state"] = json.dumps(self.rng.bit_generator.state)
        if self.buffer:
            arrays["buffer_x"] = np.stack([v for v, _ in self.buffer])
            arrays["buffer_y"] = np.array([lab for _, lab in self.buffer], dtype=np.float64)
        return meta, arrays

    def _restore(self, meta, arrays):
        super()._restore(meta, arrays)
        self.buffer_capacity = int(meta["buffer_capacity"])
        self.seed = int(meta["seed"])
        self.replay_reads = int(meta["replay_reads"])
        self.rng = np.random.default_rng()
        self.rng.bit_generator.state = json.loads(meta["rng_state"])
        self.buffer = []
        if "buffer_x" in arrays:
            xs = arrays["buffer_x"].reshape(-1, self.dim)
            ys = arrays["buffer_y"].reshape(-1)
            self.buffer = [(xs[i].copy(), int(ys[i])) for i in range(xs.shape[0])]


_LEARNER_CLASSES = {
    cls.kind: cls
    for cls in (
        FtLearner, PrcpLearner, NcmLearner, CbclLearner, SovrLearner,
        SnbLearner, SldaLearner, SqdaLearner, IcarlLearner,
    )
}


def make_learner(kind: str, dim: int, **hyperparams) -> Learner:
    kind = kind.upper()
    if kind not in _LEARNER_CLASSES:
        raise LearnerError(f"unknown learner kind {kind!r}; have {sorted(_LEARNER_CLASSES)}")
    return _LEARNER_CLASSES[kind](dim, **hyperparams)


# ---------------------------------------------------------------------------
# Serialization: magic + version + JSON meta + raw little-endian arrays
# ---------------------------------------------------------------------------

def serialize(learner: Learner) -> bytes:
    meta, arrays = learner._payload()
    names = sorted(arrays)
    meta["arrays"] = [
        {"name": n, "shape": list(arrays[n].shape)} for n in names
    ]
    meta_blob = json.dumps(meta, sort_keys=True).encode()
    parts = [_SER_HEAD.pack(_SER_MAGIC, _SER_VERSION, len(meta_blob)), meta_blob]
    for n in names:
        parts.append(np.ascontiguousarray(arrays[n], dtype="<f8").tobytes())
    return b"".join(parts)


def deserialize(blob: bytes) -> Learner:
    if len(blob) < _SER_HEAD.size:
        raise LearnerError("serialized learner truncated in header")
    magic, version, meta_len = _SER_HEAD.unpack_from(blob, 0)
    if magic != _SER_MAGIC:
        raise LearnerError(f"bad learner magic {magic!r}")
    if version != _SER_VERSION:
        raise LearnerError(f"unsupported learner state version {version}")
    offset = _SER_HEAD.size
    if offset + meta_len > len(blob):
        raise LearnerError("serialized learner truncated in metadata")
    try:
        meta = json.loads(blob[offset:offset + meta_len])
    except json.JSONDecodeError as exc:
        raise LearnerError(f"corrupt learner metadata: {exc}") from exc
    offset += meta_len

    arrays = {}
    for desc in meta["arrays"]:
        count = int(np.prod(desc["shape"])) if desc["shape"] else 1
        nbytes = 8 * count
        if offset + nbytes > len(blob):
            raise LearnerError(f"serialized learner truncated in array {desc['name']!r}")
        arrays[desc["name"]] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
            .astype(np.float64)
            .reshape(desc["shape"])
        )
        offset += nbytes

    kind = meta["kind"]
    if kind not in _LEARNER_CLASSES:
        raise LearnerError(f"unknown learner kind {kind!r} in serialized state")
    learner = _LEARNER_CLASSES[kind](int(meta["dim"]))
    learner.samples_seen = int(meta["samples_seen"])
    learner._seen_order = [int(v) for v in meta["seen_order"]]
    learner._restore(meta, arrays)
    return learner
