"""Pooling operators: reduce a t x d frame sequence to a fixed-length vector.

TAP concatenates the first R temporal moments per feature dimension (mean,
standard deviation, then standardized central moments 3..R). The remaining
operators are the usual pooling baselines; all use the population (divide
by t) variance convention so t = 1 stays defined.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .featio import FeatureSequence

DEFAULT_SIGMA_FLOOR = 1e-6

POOLER_KINDS = frozenset({
    "AVG", "MAX", "MIX", "STOCH", "LP", "RAP", "AVGMAX",
    "TSDP", "TSTP", "MAXW", "FLAT", "ISQRT_COV", "TAP",
})

# Kinds whose output is invariant to any permutation of frames.
PERMUTATION_INVARIANT = frozenset({
    "AVG", "MAX", "LP", "RAP", "TSDP", "TSTP", "TAP", "ISQRT_COV",
})


class PoolingError(ValueError):
    """Raised for invalid pooler parameters or inputs."""


@dataclasses.dataclass(frozen=True)
class PooledVector:
    """Fixed-length vector produced by a pooling operator."""

    values: np.ndarray
    pooler_tag: str

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return self.values.size


@dataclasses.dataclass(frozen=True)
class PoolerConfig:
    kind: str
    R: int = 5
    p: int = 2
    alpha: float = 0.5
    k_frac: float = 0.1
    l: int = 2
    newton_iters: int = 5
    sigma_floor: float = DEFAULT_SIGMA_FLOOR
    rng_seed: int = 0
    t_cap: int | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in POOLER_KINDS:
            raise PoolingError(f"unknown pooler kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def tag(self) -> str:
        if self.kind == "TAP":
            return f"TAP(R={self.R})"
        if self.kind == "LP":
            return f"L{self.p}"
        if self.kind == "MIX":
            return f"MIX({self.alpha:g})"
        if self.kind == "RAP":
            return f"RAP({100 * self.k_frac:g}%)"
        if self.kind == "MAXW":
            return f"MAXW_{self.l}"
        return self.kind


def _frames(g) -> np.ndarray:
    if isinstance(g, PooledVector):
        raise PoolingError("pooling input must be a frame sequence, not a pooled vector")
    if isinstance(g, FeatureSequence):
        return g.data
    arr = np.asarray(g, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise PoolingError(f"expected a t x d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PoolingError("non-finite values in pooling input")
    return arr


def tap_pool(g, R: int, sigma_floor: float = DEFAULT_SIGMA_FLOOR) -> PooledVector:
    """First R temporal moments per dim: [mu | sigma | m3 | ... | mR].

    Block r >= 3 holds the r-th standardized central moment. Dims whose
    standard deviation falls below `sigma_floor` emit 0 for blocks 2..R.
    """
    if R < 1:
        raise PoolingError(f"moment order R must be >= 1, got {R}")
    x = _frames(g)
    mu = x.mean(axis=0)
    if R == 1:
        return PooledVector(mu, f"TAP(R={R})")

    centered = x - mu
    sigma = np.sqrt(np.mean(centered ** 2, axis=0))
    live = sigma >= sigma_floor

    blocks = [mu, np.where(live, sigma, 0.0)]
    if R >= 3:
        z = np.zeros_like(centered)
        z[:, live] = centered[:, live] / sigma[live]
        power = z * z
        for _ in range(3, R + 1):
            power *= z
            blocks.append(power.mean(axis=0))
    return PooledVector(np.concatenate(blocks), f"TAP(R={R})")


def avg_pool(g) -> PooledVector:
    """Temporal mean per dim."""
    return PooledVector(_frames(g).mean(axis=0), "AVG")


def max_pool(g) -> PooledVector:
    """Temporal maximum per dim."""
    return PooledVector(_frames(g).max(axis=0), "MAX")


def mix_pool(g, alpha: float = 0.5) -> PooledVector:
    """alpha * MAX + (1 - alpha) * AVG."""
    if not 0.0 <= alpha <= 1.0:
        raise PoolingError(f"alpha must lie in [0, 1], got {alpha}")
    x = _frames(g)
    return PooledVector(alpha * x.max(axis=0) + (1.0 - alpha) * x.mean(axis=0), f"MIX({alpha:g})")


def stoch_pool(g, rng_seed: int = 0) -> PooledVector:
    """Pick one frame per dim, with probability proportional to the
    min-shifted activation (uniform when the column is constant)."""
    x = _frames(g)
    t, d = x.shape
    if t == 1:
        return PooledVector(x[0].copy(), "STOCH")
    rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed) & 0xFFFFFFFFFFFFFFFF]))
    draws = rng.random(d)
    out = np.empty(d)
    shifted = x - x.min(axis=0)
    totals = shifted.sum(axis=0)
    for j in range(d):
        if totals[j] <= 0.0:
            idx = min(int(draws[j] * t), t - 1)
        else:
            cdf = np.cumsum(shifted[:, j]) / totals[j]
            idx = int(np.searchsorted(cdf, draws[j], side="right"))
            idx = min(idx, t - 1)
        out[j] = x[idx, j]
    return PooledVector(out, "STOCH")


def lp_pool(g, p: int) -> PooledVector:
    """Per dim, (mean over t of |g|^p)^(1/p)."""
    if p < 1:
        raise PoolingError(f"p must be >= 1, got {p}")
    x = _frames(g)
    return PooledVector(np.mean(np.abs(x) ** p, axis=0) ** (1.0 / p), f"L{p}")


def rap_pool(g, k_frac: float, t_cap: int) -> PooledVector:
    """Per dim, the top ceil(k_frac * t_cap) activations in descending order,
    padded with the dim's minimum when the sequence is shorter."""
    if not 0.0 < k_frac <= 1.0:
        raise PoolingError(f"k_frac must lie in (0, 1], got {k_frac}")
    if t_cap is None or t_cap < 1:
        raise PoolingError("RAP needs a positive t_cap")
    x = _frames(g)
    t, d = x.shape
    keep = math.ceil(k_frac * t_cap)
    sorted_desc = -np.sort(-x, axis=0)
    if t >= keep:
        kept = sorted_desc[:keep]
    else:
        pad = np.repeat(x.min(axis=0)[None, :], keep - t, axis=0)
        kept = np.vstack([sorted_desc, pad])
    return PooledVector(kept.T.reshape(-1), f"RAP({100 * k_frac:g}%)")


def avgmax_pool(g) -> PooledVector:
    """[AVG | MAX] concatenation."""
    x = _frames(g)
    return PooledVector(np.concatenate([x.mean(axis=0), x.max(axis=0)]), "AVGMAX")


def tsdp_pool(g, sigma_floor: float = DEFAULT_SIGMA_FLOOR) -> PooledVector:
    """Second-moment block only (temporal standard deviation per dim)."""
    values = tap_pool(g, 2, sigma_floor).values
    d = values.size // 2
    return PooledVector(values[d:], "TSDP")


def tstp_pool(g, sigma_floor: float = DEFAULT_SIGMA_FLOOR) -> PooledVector:
    """[mean | standard deviation] per dim."""
    return PooledVector(tap_pool(g, 2, sigma_floor).values, "TSTP")


def maxw_pool(g, l: int, t_cap: int | None = None) -> PooledVector:
    """Per dim, the window of 2l+1 frames centered on the argmax frame,
    clamped at sequence edges (edge replication). `t_cap` is accepted for
    config symmetry; the output length depends only on l."""
    del t_cap
    if l < 0:
        raise PoolingError(f"window half-width l must be >= 0, got {l}")
    x = _frames(g)
    t, d = x.shape
    centers = x.argmax(axis=0)
    offsets = np.arange(-l, l + 1)
    idx = np.clip(centers[None, :] + offsets[:, None], 0, t - 1)
    window = x[idx, np.arange(d)[None, :]]
    return PooledVector(window.T.reshape(-1), f"MAXW_{l}")


def flat_pool(g, t_cap: int) -> PooledVector:
    """Row-major flatten, truncated or zero-padded in time to t_cap frames."""
    if t_cap is None or t_cap < 1:
        raise PoolingError("FLAT needs a positive t_cap")
    x = _frames(g)
    t, d = x.shape
    if t >= t_cap:
        clipped = x[:t_cap]
    else:
        clipped = np.vstack([x, np.zeros((t_cap - t, d))])
    return PooledVector(clipped.reshape(-1), "FLAT")


def isqrt_cov_pool(g, newton_iters: int = 5) -> PooledVector:
    """Upper triangle of the approximate square root of the temporal
    covariance, via trace-normalized coupled Newton-Schulz iterations."""
    if newton_iters < 0:
        raise PoolingError(f"newton_iters must be >= 0, got {newton_iters}")
    x = _frames(g)
    t, d = x.shape
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / t
    triu = np.triu_indices(d)

    trace = float(np.trace(cov))
    if trace <= 0.0:
        return PooledVector(np.zeros(d * (d + 1) // 2), "ISQRT_COV")

    a = cov / trace
    y = a
    z = np.eye(d)
    for _ in range(newton_iters):
        mid = 0.5 * (3.0 * np.eye(d) - z @ y)
        y = y @ mid
        z = mid @ z
        if not np.all(np.isfinite(y)):
            raise PoolingError(
                "Newton-Schulz iteration diverged; lower newton_iters or check the input"
            )
    root = y * np.sqrt(trace)
    return PooledVector(root[triu], "ISQRT_COV")


def pooled_dim(config: PoolerConfig, d: int, t_cap: int | None = None) -> int:
    """Exact output dimension of the configured pooler on d-dim features."""
    cap = t_cap if t_cap is not None else config.t_cap
    kind = config.kind
    if kind in ("AVG", "MAX", "MIX", "STOCH", "LP", "TSDP"):
        return d
    if kind in ("AVGMAX", "TSTP"):
        return 2 * d
    if kind == "TAP":
        return config.R * d
    if kind == "MAXW":
        return (2 * config.l + 1) * d
    if kind == "ISQRT_COV":
        return d * (d + 1) // 2
    if kind == "RAP":
        if cap is None:
            raise PoolingError("RAP needs t_cap to have a fixed output dimension")
        return math.ceil(config.k_frac * cap) * d
    if kind == "FLAT":
        if cap is None:
            raise PoolingError("FLAT needs t_cap to have a fixed output dimension")
        return cap * d
    raise PoolingError(f"unknown pooler kind {kind!r}")


class Pooler:
    """Callable wrapper binding a PoolerConfig to its pooling function.

    `salt` perturbs only the STOCH seed so a stream can draw fresh frame
    choices per sample while staying reproducible.
    """

    def __init__(self, config: PoolerConfig):
        self.config = config
        self.tag = config.tag

    def dim(self, d: int) -> int:
        return pooled_dim(self.config, d)

    def __call__(self, g, salt: int = 0) -> PooledVector:
        c = self.config
        kind = c.kind
        if kind == "AVG":
            return avg_pool(g)
        if kind == "MAX":
            return max_pool(g)
        if kind == "MIX":
            return mix_pool(g, c.alpha)
        if kind == "STOCH":
            return stoch_pool(g, c.rng_seed + salt)
        if kind == "LP":
            return lp_pool(g, c.p)
        if kind == "RAP":
            return rap_pool(g, c.k_frac, c.t_cap)
        if kind == "AVGMAX":
            return avgmax_pool(g)
        if kind == "TSDP":
            return tsdp_pool(g, c.sigma_floor)
        if kind == "TSTP":
            return tstp_pool(g, c.sigma_floor)
        if kind == "MAXW":
            return maxw_pool(g, c.l)
        if kind == "FLAT":
            return flat_pool(g, c.t_cap)
        if kind == "ISQRT_COV":
            return isqrt_cov_pool(g, c.newton_iters)
        if kind == "TAP":
            return tap_pool(g, c.R, c.sigma_floor)
        raise PoolingError(f"unknown pooler kind {kind!r}")


def make_pooler(config: PoolerConfig) -> Pooler:
    return Pooler(config)
