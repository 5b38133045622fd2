"""Feature containers, dataset manifests, and a synthetic stream generator.

EOF1 container layout (little-endian):

    magic   4 bytes  b"EOF1"
    version u16      1
    dtype   u16      1 (float32)
    d       u32      feature dimension, shared by all records
    count   u64      number of records
    records, each:
        label  u32
        t      u32   frame count
        values t*d float32, row-major (time-major)

Values are stored as float32; all in-memory math is float64.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EOF1"
VERSION = 1
DTYPE_F32 = 1

_HEADER = struct.Struct("<4sHHIQ")
_RECORD_HEAD = struct.Struct("<II")


class ContainerFormatError(ValueError):
    """Raised when a container file violates the EOF1 layout."""


class ManifestError(ValueError):
    """Raised when a dataset manifest is malformed or inconsistent."""


@dataclasses.dataclass(frozen=True)
class FeatureSequence:
    """One utterance as a t x d matrix of frame features."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"feature sequence must be t x d with t,d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature sequence contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def t(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def _as_frames(g) -> np.ndarray:
    if isinstance(g, FeatureSequence):
        return g.data
    return FeatureSequence(np.asarray(g)).data


def write_container(sequences, path, d: int | None = None) -> None:
    """Write (sequence, label) pairs to an EOF1 container at `path`.

    All sequences must share the same feature dimension; labels must be
    non-negative integers. `d` is only needed for an empty record list.
    """
    records = []
    for seq, label in sequences:
        frames = _as_frames(seq)
        if d is None:
            d = frames.shape[1]
        elif frames.shape[1] != d:
            raise ContainerFormatError(
                f"inconsistent feature dimension: expected {d}, got {frames.shape[1]}"
            )
        label = int(label)
        if label < 0:
            raise ContainerFormatError(f"labels must be non-negative, got {label}")
        records.append((frames, label))
    if d is None:
        d = 0

    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_F32, d, len(records)))
        for frames, label in records:
            fh.write(_RECORD_HEAD.pack(label, frames.shape[0]))
            fh.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())


def read_container(path, expected_d: int | None = None) -> list[tuple[FeatureSequence, int]]:
    """Read all records of an EOF1 container, in file order."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ContainerFormatError(f"{path}: truncated header at offset {len(blob)}")
    magic, version, dtype, d, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ContainerFormatError(f"{path}: bad magic {magic!r} at offset 0")
    if version != VERSION:
        raise ContainerFormatError(f"{path}: unsupported version {version} at offset 4")
    if dtype != DTYPE_F32:
        raise ContainerFormatError(f"{path}: unsupported dtype code {dtype} at offset 6")
    if expected_d is not None and d != expected_d:
        raise ContainerFormatError(f"{path}: dimension {d} does not match manifest d={expected_d}")

    records = []
    offset = _HEADER.size
    for i in range(count):
        if offset + _RECORD_HEAD.size > len(blob):
            raise ContainerFormatError(f"{path}: record {i} truncated at offset {offset}")
        label, t = _RECORD_HEAD.unpack_from(blob, offset)
        offset += _RECORD_HEAD.size
        nbytes = 4 * t * d
        if offset + nbytes > len(blob):
            raise ContainerFormatError(f"{path}: record {i} truncated at offset {offset}")
        values = np.frombuffer(blob, dtype="<f4", count=t * d, offset=offset)
        offset += nbytes
        records.append((FeatureSequence(values.astype(np.float64).reshape(t, d)), label))
    return records


@dataclasses.dataclass
class DatasetManifest:
    """Dataset metadata: class names, dimension, split -> container files."""

    class_names: list[str]
    d: int
    splits: dict[str, list[str]]
    backbone_tag: str = ""
    backbone_param_count: int = 0
    root: Path = Path(".")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def container_paths(self, split: str) -> list[Path]:
        if split not in self.splits:
            raise ManifestError(f"unknown split {split!r}; have {sorted(self.splits)}")
        return [self.root / p for p in self.splits[split]]

    def load_split(self, split: str) -> list[tuple[FeatureSequence, int]]:
        records = []
        for path in self.container_paths(split):
            records.extend(read_container(path, expected_d=self.d))
        return records

    def validate(self) -> None:
        """Check that every listed container exists, parses, and labels are in range."""
        for split in self.splits:
            for path in self.container_paths(split):
                if not path.exists():
                    raise ManifestError(f"missing container file: {path}")
                for i, (seq, label) in enumerate(read_container(path, expected_d=self.d)):
                    if label >= self.num_classes:
                        raise ManifestError(
                            f"{path}: record {i} label {label} out of range "
                            f"for {self.num_classes} classes"
                        )


def save_manifest(manifest: DatasetManifest, path) -> Path:
    path = Path(path)
    doc = {
        "class_names": manifest.class_names,
        "d": manifest.d,
        "splits": manifest.splits,
        "backbone_tag": manifest.backbone_tag,
        "backbone_param_count": manifest.backbone_param_count,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot load manifest {path}: {exc}") from exc
    for key in ("class_names", "d", "splits"):
        if key not in doc:
            raise ManifestError(f"{path}: manifest missing key {key!r}")
    return DatasetManifest(
        class_names=list(doc["class_names"]),
        d=int(doc["d"]),
        splits={k: list(v) for k, v in doc["splits"].items()},
        backbone_tag=str(doc.get("backbone_tag", "")),
        backbone_param_count=int(doc.get("backbone_param_count", 0)),
        root=path.parent,
    )


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic synthetic dataset.

    `moment_contrast` slides class separation between the first moment and
    the higher ones: at 0 classes differ only in their frame means, at 1 the
    means coincide and only variance/skew/kurtosis differ.
    """

    num_classes: int
    d: int
    t_range: tuple[int, int] = (20, 40)
    samples_per_class: dict[str, int] = dataclasses.field(
        default_factory=lambda: {"train": 200, "dev": 50, "test": 50}
    )
    seed: int = 0
    moment_contrast: float = 0.0

    def __post_init__(self):
        if self.num_classes < 1 or self.d < 1:
            raise ValueError("num_classes and d must be >= 1")
        t_min, t_max = self.t_range
        if not (1 <= t_min <= t_max):
            raise ValueError(f"invalid t_range {self.t_range}")
        if not 0.0 <= self.moment_contrast <= 1.0:
            raise ValueError("moment_contrast must lie in [0, 1]")
        if any(n < 1 for n in self.samples_per_class.values()):
            raise ValueError("samples_per_class entries must be >= 1")


# Process constants. The per-class innovation is a standardized signed-power
# transform of shifted Gaussian noise; the shift makes the transform
# asymmetric so the exponent moves skewness, not just kurtosis.
AR_COEFF = 0.3
MEAN_SPACING = 0.2
SKEW_ANCHOR = 1.0
GAMMA_SPREAD = 1.0
SCALE_SPREAD = 0.6
DIM_SCALE_RANGE = (0.5, 2.0)
_BURN_IN = 16
_QUAD_NODES = 201


def _signed_power(z: np.ndarray, gamma: float) -> np.ndarray:
    shifted = z + SKEW_ANCHOR
    return np.sign(shifted) * np.abs(shifted) ** gamma


def _innovation_loc_scale(gamma: float) -> tuple[float, float]:
    # Exact mean/std of the signed-power transform under N(0,1), via
    # Gauss-Hermite quadrature, so standardization keeps location and scale
    # pinned for every exponent.
    nodes, weights = np.polynomial.hermite_e.hermegauss(_QUAD_NODES)
    weights = weights / np.sqrt(2.0 * np.pi)
    f = _signed_power(nodes, gamma)
    mean = float(weights @ f)
    var = float(weights @ (f - mean) ** 2)
    return mean, np.sqrt(var)


def _class_params(spec: SyntheticSpec, cls: int) -> tuple[float, float, float]:
    mc = spec.moment_contrast
    frac = cls / max(spec.num_classes - 1, 1)
    mean_shift = MEAN_SPACING * (cls - (spec.num_classes - 1) / 2.0) * (1.0 - mc)
    gamma = 1.0 + mc * GAMMA_SPREAD * frac
    scale = 1.0 + mc * SCALE_SPREAD * (frac - 0.5)
    return mean_shift, gamma, scale


def _dim_scales(d: int) -> np.ndarray:
    lo, hi = DIM_SCALE_RANGE
    if d == 1:
        return np.array([1.0])
    return np.linspace(lo, hi, d)


def _generate_class_split(spec: SyntheticSpec, cls: int, split_idx: int, n: int):
    """All sequences for one (class, split) cell, as a list of FeatureSequence."""
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF, split_idx, cls])
    )
    mean_shift, gamma, scale = _class_params(spec, cls)
    loc, sd = _innovation_loc_scale(gamma)
    dim_scale = _dim_scales(spec.d)

    t_min, t_max = spec.t_range
    lengths = rng.integers(t_min, t_max + 1, size=n)
    total_t = int(lengths.max()) + _BURN_IN

    z = rng.standard_normal((n, total_t, spec.d))
    innov = scale * (_signed_power(z, gamma) - loc) / sd
    chain = np.zeros((n, total_t, spec.d))
    chain[:, 0] = innov[:, 0]
    for step in range(1, total_t):
        chain[:, step] = AR_COEFF * chain[:, step - 1] + innov[:, step]

    sequences = []
    for i in range(n):
        frames = chain[i, _BURN_IN:_BURN_IN + lengths[i]] * dim_scale + mean_shift
        sequences.append(FeatureSequence(frames))
    return sequences


def generate_synthetic(spec: SyntheticSpec, out_dir) -> DatasetManifest:
    """Generate containers plus manifest under `out_dir`; pure in `spec`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    split_names = sorted(spec.samples_per_class)
    splits: dict[str, list[str]] = {}
    for split_idx, split in enumerate(split_names):
        n = spec.samples_per_class[split]
        records = []
        for cls in range(spec.num_classes):
            for seq in _generate_class_split(spec, cls, split_idx, n):
                records.append((seq, cls))
        fname = f"{split}.eof1"
        write_container(records, out_dir / fname, d=spec.d)
        splits[split] = [fname]

    manifest = DatasetManifest(
        class_names=[f"word_{c:02d}" for c in range(spec.num_classes)],
        d=spec.d,
        splits=splits,
        backbone_tag=f"synthetic-ar1-mc{spec.moment_contrast:g}",
        backbone_param_count=1_000_000,
        root=out_dir,
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest
