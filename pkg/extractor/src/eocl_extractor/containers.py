"""Writer for the EOF1 feature container and its JSON manifest.

This is the wire format the training harness consumes; the layout is
implemented here independently so the two packages only share bytes.

    magic   4 bytes  b"EOF1"
    version u16      1
    dtype   u16      1 (float32)
    d       u32      feature dimension
    count   u64      number of records
    records: { u32 label; u32 t; t*d float32, time-major }
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sHHIQ")
_RECORD_HEAD = struct.Struct("<II")


def write_eof1(records, path, d: int) -> Path:
    """Write (frames, label) records; frames are (t, d) arrays."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"EOF1", 1, 1, d, len(records)))
        for frames, label in records:
            frames = np.ascontiguousarray(frames, dtype="<f4")
            if frames.ndim != 2 or frames.shape[1] != d:
                raise ValueError(f"expected (t, {d}) frames, got {frames.shape}")
            fh.write(_RECORD_HEAD.pack(int(label), frames.shape[0]))
            fh.write(frames.tobytes())
    return path


def write_manifest(path, class_names, d, splits, backbone_tag, backbone_param_count) -> Path:
    path = Path(path)
    doc = {
        "class_names": list(class_names),
        "d": int(d),
        "splits": {k: list(v) for k, v in splits.items()},
        "backbone_tag": backbone_tag,
        "backbone_param_count": int(backbone_param_count),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
