"""Frame-feature export from frozen speech backbones into EOF1 containers."""

__version__ = "0.1.0"

from .backbones import BACKBONE_TAGS, Backbone, BackboneError, load_backbone
from .containers import write_eof1, write_manifest
from .extract import ExtractionJob, extract
from .gsc import DatasetError, read_wav, split_files
from .mswc import build_mswc_micro

__all__ = [name for name in dir() if not name.startswith("_")]
