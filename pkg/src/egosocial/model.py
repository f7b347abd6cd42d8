"""Canonical data model: identity keys, frame-indexed tracks, utterance segments.

Every frame-indexed signal (prediction scores, face quality, binary labels)
is stored as a pair of numpy arrays sorted by frame and locked read-only at
construction, so a built Dataset can be shared across threads without
copying. Score tracks from different upstream models are kept apart by a
source name supplied at load time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DataFormatError

# Characters that would break the line-delimited and CSV wire formats.
_ID_FORBIDDEN = "\n\r\t,"


def _check_identifier(field_name: str, value: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{field_name} must be a non-empty string")
    if any(ch in value for ch in _ID_FORBIDDEN):
        raise ValueError(
            f"{field_name} {value!r} contains a newline or field-separator character"
        )


@dataclass(frozen=True, order=True)
class TrackKey:
    """Identity of one tracked person within one clip."""

    clip_id: str
    person_id: str

    def __post_init__(self) -> None:
        _check_identifier("clip_id", self.clip_id)
        _check_identifier("person_id", self.person_id)

    def __str__(self) -> str:
        return f"{self.clip_id}/{self.person_id}"


def _frame_array(frames) -> np.ndarray:
    arr = np.ascontiguousarray(frames, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("frames must be a one-dimensional sequence")
    if arr.size and int(arr[0]) < 0:
        raise ValueError("frame indices must be non-negative")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError("frame indices must be strictly increasing")
    arr.setflags(write=False)
    return arr


def _unit_array(values, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{what} values must be a one-dimensional sequence")
    if arr.size and not (np.all(np.isfinite(arr)) and arr.min() >= 0.0 and arr.max() <= 1.0):
        raise ValueError(f"{what} values must be finite numbers in [0, 1]")
    arr.setflags(write=False)
    return arr


def _binary_array(values, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{what} values must be a one-dimensional sequence")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{what} values must be 0 or 1")
    arr = arr.astype(np.uint8)
    arr.setflags(write=False)
    return arr


def _unit_scalar(value, what: str) -> float:
    value = float(value)
    if not (np.isfinite(value) and 0.0 <= value <= 1.0):
        raise ValueError(f"{what} must be a finite number in [0, 1]")
    return value


@dataclass(frozen=True, eq=False)
class FrameScoreTrack:
    """Per-(clip, person) time series of prediction scores in [0, 1]."""

    key: TrackKey
    frames: np.ndarray
    scores: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", _frame_array(self.frames))
        object.__setattr__(self, "scores", _unit_array(self.scores, "score"))
        if self.frames.shape != self.scores.shape:
            raise ValueError("frames and scores must have equal length")

    def __len__(self) -> int:
        return int(self.frames.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameScoreTrack):
            return NotImplemented
        return (
            self.key == other.key
            and np.array_equal(self.frames, other.frames)
            and np.array_equal(self.scores, other.scores)
        )

    def entries(self) -> Iterator[tuple[int, float]]:
        return zip(self.frames.tolist(), self.scores.tolist())

    def with_scores(self, scores) -> "FrameScoreTrack":
        """Same key and frame domain, new score values."""
        return FrameScoreTrack(self.key, self.frames, scores)


@dataclass(frozen=True, eq=False)
class QualityTrack:
    """Per-(clip, person) time series of face-quality scores in [0, 1]."""

    key: TrackKey
    frames: np.ndarray
    quality: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", _frame_array(self.frames))
        object.__setattr__(self, "quality", _unit_array(self.quality, "quality"))
        if self.frames.shape != self.quality.shape:
            raise ValueError("frames and quality must have equal length")

    def __len__(self) -> int:
        return int(self.frames.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QualityTrack):
            return NotImplemented
        return (
            self.key == other.key
            and np.array_equal(self.frames, other.frames)
            and np.array_equal(self.quality, other.quality)
        )

    def entries(self) -> Iterator[tuple[int, float]]:
        return zip(self.frames.tolist(), self.quality.tolist())


@dataclass(frozen=True, eq=False)
class FrameLabelTrack:
    """Per-(clip, person) time series of binary frame labels."""

    key: TrackKey
    frames: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", _frame_array(self.frames))
        object.__setattr__(self, "labels", _binary_array(self.labels, "label"))
        if self.frames.shape != self.labels.shape:
            raise ValueError("frames and labels must have equal length")

    def __len__(self) -> int:
        return int(self.frames.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameLabelTrack):
            return NotImplemented
        return (
            self.key == other.key
            and np.array_equal(self.frames, other.frames)
            and np.array_equal(self.labels, other.labels)
        )

    def entries(self) -> Iterator[tuple[int, int]]:
        return zip(self.frames.tolist(), self.labels.tolist())


@dataclass(frozen=True)
class UtteranceSegment:
    """Inclusive frame interval tied to one speaker's audio activity.

    Carries the optional per-utterance audio score and the optional binary
    talking-to-me label. Segments of one TrackKey must be pairwise disjoint.
    """

    key: TrackKey
    start_frame: int
    end_frame: int
    audio_score: float | None = None
    label: int | None = None

    def __post_init__(self) -> None:
        for name in ("start_frame", "end_frame"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value))
        if self.start_frame < 0:
            raise ValueError("start_frame must be non-negative")
        if self.start_frame > self.end_frame:
            raise ValueError(
                f"start_frame {self.start_frame} exceeds end_frame {self.end_frame}"
            )
        if self.audio_score is not None:
            object.__setattr__(self, "audio_score", _unit_scalar(self.audio_score, "audio_score"))
        if self.label is not None:
            if self.label not in (0, 1):
                raise ValueError("label must be 0 or 1")
            object.__setattr__(self, "label", int(self.label))

    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1

    def overlaps(self, other: "UtteranceSegment") -> bool:
        return self.start_frame <= other.end_frame and other.start_frame <= self.end_frame


def _segment_sort_key(segment: UtteranceSegment):
    return (segment.key, segment.start_frame, segment.end_frame)


@dataclass
class Dataset:
    """All loaded tracks and segments.

    Score tracks are grouped by source name; quality and label tracks have a
    single implicit source. Lists may transiently hold duplicates for the
    same key, which validate_dataset reports and the index methods reject.
    """

    scores: dict[str, list[FrameScoreTrack]] = field(default_factory=dict)
    segments: list[UtteranceSegment] = field(default_factory=list)
    quality: list[QualityTrack] = field(default_factory=list)
    labels: list[FrameLabelTrack] = field(default_factory=list)

    def add_score_tracks(self, source: str, tracks) -> None:
        if not isinstance(source, str) or not source:
            raise ValueError("source must be a non-empty string")
        self.scores.setdefault(source, []).extend(tracks)

    def score_index(self, source: str) -> dict[TrackKey, FrameScoreTrack]:
        if source not in self.scores:
            raise DataFormatError(f"no score tracks loaded for source {source!r}")
        return _index_by_key(self.scores[source], f"score source {source!r}")

    def quality_index(self) -> dict[TrackKey, QualityTrack]:
        return _index_by_key(self.quality, "quality tracks")

    def label_index(self) -> dict[TrackKey, FrameLabelTrack]:
        return _index_by_key(self.labels, "label tracks")

    def segments_by_key(self) -> dict[TrackKey, list[UtteranceSegment]]:
        grouped: dict[TrackKey, list[UtteranceSegment]] = {}
        for segment in self.segments:
            grouped.setdefault(segment.key, []).append(segment)
        for segs in grouped.values():
            segs.sort(key=lambda s: (s.start_frame, s.end_frame))
        return grouped


def _index_by_key(tracks, what: str):
    index = {}
    for track in tracks:
        if track.key in index:
            raise DataFormatError(f"duplicate track for {track.key} in {what}")
        index[track.key] = track
    return index
