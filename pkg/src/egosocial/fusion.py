"""Score fusion: audio/visual combination per utterance and multi-source ensembling.

Two fusion rules are provided. Plain averaging takes (visual + audio) / 2.
Quality weighting takes q * visual + (1 - q) * audio with q the segment's
mean face quality, so an unreliable (low quality) face defers to audio and a
clean face is trusted; at q = 0.5 the two rules agree bit for bit.

Ensembling is a weighted arithmetic mean across sources. Per-frame sums use
math.fsum, which is exactly rounded, so ensemble output is invariant under
reordering of (track, weight) pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DataFormatError, KeyMismatchError
from .filters import (
    MedianConfig,
    SegmentVisualScore,
    broadcast_segment_scores,
    max_score_filter,
    median_filter,
    segment_frame_domain,
    segment_mean_quality,
)
from .model import Dataset, FrameScoreTrack, QualityTrack, TrackKey, UtteranceSegment

log = logging.getLogger(__name__)


class FusionMethod(str, Enum):
    AVERAGE = "average"
    QUALITY_WEIGHTED = "quality_weighted"


def fuse_segment(
    visual_score: float,
    audio_score: float,
    mean_quality: float,
    method: FusionMethod,
) -> float:
    """Combine one segment's visual and audio scores into a single value."""
    for name, value in (
        ("visual_score", visual_score),
        ("audio_score", audio_score),
        ("mean_quality", mean_quality),
    ):
        if not (math.isfinite(value) and 0.0 <= value <= 1.0):
            raise ValueError(f"{name} must be a finite number in [0, 1], got {value!r}")
    if method is FusionMethod.AVERAGE:
        return (visual_score + audio_score) / 2.0
    if method is FusionMethod.QUALITY_WEIGHTED:
        return mean_quality * visual_score + (1.0 - mean_quality) * audio_score
    raise ConfigError(f"unknown fusion method {method!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    """Named sources to combine, with optional non-negative weights."""

    sources: tuple[str, ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        sources = tuple(self.sources)
        object.__setattr__(self, "sources", sources)
        if not sources:
            raise ConfigError("ensemble requires at least one source")
        if any(not isinstance(s, str) or not s for s in sources):
            raise ConfigError("ensemble source names must be non-empty strings")
        if len(set(sources)) != len(sources):
            raise ConfigError("ensemble source names must be distinct")
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            object.__setattr__(self, "weights", weights)
            if len(weights) != len(sources):
                raise ConfigError(
                    f"{len(weights)} weights given for {len(sources)} sources"
                )
            if any(not math.isfinite(w) or w < 0.0 for w in weights):
                raise ConfigError("ensemble weights must be non-negative finite numbers")
            if math.fsum(weights) <= 0.0:
                raise ConfigError("ensemble weights must sum to a positive value")

    def normalized_weights(self) -> tuple[float, ...]:
        if self.weights is None:
            n = len(self.sources)
            return (1.0 / n,) * n
        total = math.fsum(self.weights)
        return tuple(w / total for w in self.weights)


def ensemble_tracks(
    tracks: list[FrameScoreTrack],
    spec: EnsembleSpec,
    *,
    align: str = "strict",
) -> FrameScoreTrack:
    """Weighted per-frame mean of several tracks for one key."""
    if len(tracks) != len(spec.sources):
        raise ConfigError(f"{len(tracks)} tracks given for {len(spec.sources)} sources")
    key = tracks[0].key
    for track in tracks[1:]:
        if track.key != key:
            raise KeyMismatchError(f"ensemble member keys differ: {key} vs {track.key}")
    weights = spec.normalized_weights()

    if align == "strict":
        for track, source in zip(tracks, spec.sources):
            if not np.array_equal(track.frames, tracks[0].frames):
                raise DataFormatError(
                    f"frame domains differ between ensemble members for {key} "
                    f"(source {source!r}); use align='intersect' to drop non-shared frames"
                )
        frames = tracks[0].frames
        columns = [track.scores for track in tracks]
    elif align == "intersect":
        frames = reduce(np.intersect1d, [track.frames for track in tracks])
        dropped = sum(len(track) - frames.size for track in tracks)
        if dropped:
            log.warning(
                "ensemble intersect dropped %d non-shared frame entries for %s", dropped, key
            )
        columns = [track.scores[np.searchsorted(track.frames, frames)] for track in tracks]
    else:
        raise ConfigError(f"unknown alignment mode {align!r}; expected 'strict' or 'intersect'")

    k = len(columns)
    out = np.empty(frames.size, dtype=np.float64)
    for i in range(frames.size):
        values = [float(columns[j][i]) for j in range(k)]
        combined = math.fsum(weights[j] * values[j] for j in range(k))
        # Convex combination; clamp away any last-ulp drift from normalization.
        out[i] = min(max(combined, min(values)), max(values))
    return FrameScoreTrack(key, frames, out)


def ensemble_sources(
    indexes: Mapping[str, Mapping[TrackKey, FrameScoreTrack]],
    spec: EnsembleSpec,
    *,
    align: str = "strict",
) -> dict[TrackKey, FrameScoreTrack]:
    """Apply ensemble_tracks across every key shared by the named sources."""
    for source in spec.sources:
        if source not in indexes:
            raise DataFormatError(f"no score tracks loaded for source {source!r}")
    key_sets = [set(indexes[source]) for source in spec.sources]
    common = set.intersection(*key_sets)
    if align == "strict":
        union = set.union(*key_sets)
        if union != common:
            missing = sorted(str(k) for k in union - common)
            raise DataFormatError(
                f"ensemble sources cover different keys (strict alignment): missing {missing}"
            )
    else:
        dropped = len(set.union(*key_sets)) - len(common)
        if dropped:
            log.warning("ensemble intersect dropped %d keys not shared by all sources", dropped)
    return {
        key: ensemble_tracks([indexes[source][key] for source in spec.sources], spec, align=align)
        for key in sorted(common)
    }


@dataclass
class FusionResult:
    """Fused tracks keyed by TrackKey plus human-readable flags."""

    tracks: dict[TrackKey, FrameScoreTrack] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def fuse_tracks(
    visual_index: Mapping[TrackKey, FrameScoreTrack],
    segments: Iterable[UtteranceSegment],
    quality_index: Mapping[TrackKey, QualityTrack],
    method: FusionMethod,
    median: MedianConfig | None = None,
) -> FusionResult:
    """Fuse visual tracks with per-segment audio scores.

    Per segment: max-score filter, segment mean quality, fuse, broadcast to
    the segment's member frames; each key's resulting track is then
    median-smoothed when a config is given. Segments without an audio score
    fall back to the visual segment score and are flagged.
    """
    result = FusionResult()
    grouped: dict[TrackKey, list[UtteranceSegment]] = {}
    for segment in segments:
        grouped.setdefault(segment.key, []).append(segment)
    for segs in grouped.values():
        segs.sort(key=lambda s: (s.start_frame, s.end_frame))

    for key in sorted(visual_index):
        if key not in grouped:
            result.warnings.append(f"visual track {key} has no segments and was skipped")

    for key in sorted(grouped):
        segs = grouped[key]
        visual = visual_index.get(key)
        if visual is None:
            result.warnings.append(f"no visual track for {key}; visual scores treated as 0")
            visual = FrameScoreTrack(key, np.empty(0, dtype=np.int64), np.empty(0))
        segment_scores = max_score_filter(visual, segs)
        quality = None
        if method is FusionMethod.QUALITY_WEIGHTED:
            quality = quality_index.get(key)
            if quality is None:
                raise DataFormatError(
                    f"quality-weighted fusion requires a quality track for {key}"
                )
        fused = []
        for sv in segment_scores:
            segment = sv.segment
            if segment.audio_score is None:
                result.warnings.append(
                    f"segment {key} [{segment.start_frame}, {segment.end_frame}] "
                    f"lacks audio_score; using the visual segment score"
                )
                value = sv.visual_score
            else:
                mean_q = (
                    segment_mean_quality(quality, segment)
                    if method is FusionMethod.QUALITY_WEIGHTED
                    else 0.5
                )
                value = fuse_segment(sv.visual_score, segment.audio_score, mean_q, method)
            fused.append(SegmentVisualScore(segment, value, sv.n_frames_covered))
        track = broadcast_segment_scores(fused, segment_frame_domain(segs))
        if median is not None:
            track = median_filter(track, median)
        result.tracks[key] = track
    return result


def fuse_ttm(
    dataset: Dataset,
    visual_source: str,
    method: FusionMethod,
    median: MedianConfig | None = None,
) -> FusionResult:
    """Fuse a dataset's visual source with its segments' audio scores."""
    visual_index = dataset.score_index(visual_source)
    quality_index = dataset.quality_index()
    return fuse_tracks(visual_index, dataset.segments, quality_index, method, median)
