"""Temporal post-processing of score tracks.

Median smoothing runs over entry positions (not absolute frame numbers), so
tracks with detection gaps still smooth over their temporal neighbors. The
max-score filter lifts frame-level visual scores to utterance level, and
broadcast maps utterance-level values back onto member frames for
frame-level evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, CoverageError, KeyMismatchError
from .model import FrameScoreTrack, QualityTrack, UtteranceSegment


@dataclass(frozen=True)
class MedianConfig:
    """Window width, in entries, of the median smoother."""

    window: int = 5

    def __post_init__(self) -> None:
        if isinstance(self.window, bool) or not isinstance(self.window, int):
            raise ConfigError(f"median window must be an integer, got {self.window!r}")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"median window must be an odd positive integer, got {self.window}")


def median_filter(track: FrameScoreTrack, config: MedianConfig | None = None) -> FrameScoreTrack:
    """Median-smooth a track; frame indices are preserved exactly.

    Windows are centered on each entry and truncated at the track ends; a
    truncated even-sized window resolves to the mean of its two middle
    values.
    """
    cfg = config if config is not None else MedianConfig()
    if len(track) == 0:
        return track
    smoothed = _kernels.median_window(np.ascontiguousarray(track.scores), cfg.window)
    return track.with_scores(smoothed)


@dataclass(frozen=True)
class SegmentVisualScore:
    """One utterance segment with its aggregated score.

    visual_score holds the segment maximum straight after the max-score
    filter and the fused value once fusion has run; n_frames_covered counts
    the track entries that fell inside the segment (0 flags segments the
    track never covered).
    """

    segment: UtteranceSegment
    visual_score: float
    n_frames_covered: int

    def __post_init__(self) -> None:
        score = float(self.visual_score)
        if not (np.isfinite(score) and 0.0 <= score <= 1.0):
            raise ValueError("visual_score must be a finite number in [0, 1]")
        object.__setattr__(self, "visual_score", score)
        if self.n_frames_covered < 0:
            raise ValueError("n_frames_covered must be non-negative")


def _segment_slice(frames: np.ndarray, segment: UtteranceSegment) -> tuple[int, int]:
    lo = int(np.searchsorted(frames, segment.start_frame, side="left"))
    hi = int(np.searchsorted(frames, segment.end_frame, side="right"))
    return lo, hi


def max_score_filter(
    visual: FrameScoreTrack, segments: Iterable[UtteranceSegment]
) -> list[SegmentVisualScore]:
    """Collapse each segment to the maximum visual score inside it.

    Segments containing no track entries get score 0.0 with
    n_frames_covered 0; a speaker may simply never face the camera wearer,
    so empty coverage is expected data rather than an error.
    """
    out = []
    for segment in segments:
        if segment.key != visual.key:
            raise KeyMismatchError(
                f"segment key {segment.key} does not match track key {visual.key}"
            )
        lo, hi = _segment_slice(visual.frames, segment)
        covered = hi - lo
        score = float(visual.scores[lo:hi].max()) if covered else 0.0
        out.append(SegmentVisualScore(segment, score, covered))
    return out


def broadcast_segment_scores(
    segment_scores: Sequence[SegmentVisualScore], frame_domain
) -> FrameScoreTrack:
    """Spread each segment's score onto the domain frames it covers.

    Every domain frame must fall inside some segment; frames outside the
    domain are simply absent from the output track.
    """
    segment_scores = list(segment_scores)
    if not segment_scores:
        raise ConfigError("broadcast requires at least one segment score")
    key = segment_scores[0].segment.key
    for sv in segment_scores[1:]:
        if sv.segment.key != key:
            raise KeyMismatchError(
                f"segment keys differ within one broadcast: {key} vs {sv.segment.key}"
            )
    domain = np.unique(np.asarray(list(frame_domain), dtype=np.int64))
    scores = np.full(domain.size, -1.0)
    for sv in segment_scores:
        lo, hi = _segment_slice(domain, sv.segment)
        scores[lo:hi] = sv.visual_score
    if scores.size and scores.min() < 0.0:
        missing = int(domain[int(np.argmin(scores))])
        raise CoverageError(f"frame {missing} is not covered by any segment")
    return FrameScoreTrack(key, domain, scores)


def segment_frame_domain(segments: Iterable[UtteranceSegment]) -> np.ndarray:
    """Union of the inclusive frame ranges of the given segments."""
    parts = [np.arange(s.start_frame, s.end_frame + 1, dtype=np.int64) for s in segments]
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(parts))


def segment_mean_quality(quality: QualityTrack, segment: UtteranceSegment) -> float:
    """Arithmetic mean of quality entries inside the segment.

    Returns 0.0 when no quality entries fall inside: no detected face means
    fusion should trust audio fully.
    """
    if segment.key != quality.key:
        raise KeyMismatchError(
            f"segment key {segment.key} does not match quality track key {quality.key}"
        )
    lo, hi = _segment_slice(quality.frames, segment)
    if hi == lo:
        return 0.0
    return float(quality.quality[lo:hi].mean())
