"""Thin exporters from upstream model dump formats to egosocial's canonical JSONL."""

from .convert import (
    AdapterManifest,
    convert_lam_predictions,
    convert_quality_scores,
    convert_ttm_segments,
)
from .errors import AdapterError, InputError, UnknownFormatError
from .formats import FORMATS

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "AdapterManifest",
    "FORMATS",
    "InputError",
    "UnknownFormatError",
    "convert_lam_predictions",
    "convert_quality_scores",
    "convert_ttm_segments",
]
