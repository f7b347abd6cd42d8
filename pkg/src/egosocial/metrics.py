"""Ranking metrics: pooled average precision, thresholded accuracy, PR curves.

Average precision follows the non-interpolated information-retrieval
definition: items are ranked by score descending with deterministic
(clip_id, person_id, frame) tie-breaking, and AP is the mean over positive
items of precision at their rank. Accuracy thresholds inclusively
(score >= threshold predicts positive). The PR curve is reported at each
distinct score threshold, so equal-score items move together.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import DataFormatError, UndefinedMetricError
from .model import FrameLabelTrack, FrameScoreTrack, TrackKey, UtteranceSegment


@dataclass(frozen=True, slots=True)
class ScoredItem:
    """One evaluated prediction: score, binary label, deterministic identity."""

    score: float
    label: int
    tiebreak_key: tuple[str, str, int]

    def __post_init__(self) -> None:
        if not (self.score == self.score and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score!r}")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class _ItemArrays:
    scores: np.ndarray
    labels: np.ndarray
    clips: np.ndarray
    persons: np.ndarray
    frames: np.ndarray

    @property
    def size(self) -> int:
        return int(self.scores.size)


def _collect(items: Sequence[ScoredItem]) -> _ItemArrays:
    return _ItemArrays(
        scores=np.array([item.score for item in items], dtype=np.float64),
        labels=np.array([item.label for item in items], dtype=np.float64),
        clips=np.array([item.tiebreak_key[0] for item in items]),
        persons=np.array([item.tiebreak_key[1] for item in items]),
        frames=np.array([item.tiebreak_key[2] for item in items], dtype=np.int64),
    )


def _ranking(arrays: _ItemArrays) -> np.ndarray:
    # lexsort: last key is primary, so this is score descending then
    # (clip, person, frame) ascending.
    return np.lexsort((arrays.frames, arrays.persons, arrays.clips, -arrays.scores))


def _ap(arrays: _ItemArrays) -> float:
    if arrays.size == 0:
        raise UndefinedMetricError("average precision is undefined for an empty item set")
    if arrays.labels.sum() == 0:
        raise UndefinedMetricError("average precision is undefined with zero positive items")
    order = _ranking(arrays)
    value = float(_kernels.ap_ranked(np.ascontiguousarray(arrays.labels[order])))
    assert value >= 0.0
    return value


def average_precision(items: Sequence[ScoredItem]) -> float:
    """Non-interpolated AP of the pooled items."""
    return _ap(_collect(items))


def top1_accuracy(items: Sequence[ScoredItem], threshold: float = 0.5) -> float:
    """Fraction of items whose thresholded score matches the label."""
    if not items:
        raise UndefinedMetricError("accuracy is undefined for an empty item set")
    arrays = _collect(items)
    return _accuracy(arrays, threshold)


def _accuracy(arrays: _ItemArrays, threshold: float) -> float:
    predicted = arrays.scores >= threshold
    return float(np.mean(predicted == (arrays.labels > 0)))


def _pr_curve(arrays: _ItemArrays) -> list[tuple[float, float]]:
    order = np.argsort(-arrays.scores, kind="stable")
    scores = arrays.scores[order]
    cum_tp = np.cumsum(arrays.labels[order])
    total_pos = cum_tp[-1]
    # Emit one point per distinct threshold: the last index of each group.
    boundaries = np.nonzero(np.diff(scores))[0]
    idx = np.concatenate([boundaries, [scores.size - 1]])
    recalls = cum_tp[idx] / total_pos
    precisions = cum_tp[idx] / (idx + 1.0)
    return [(float(r), float(p)) for r, p in zip(recalls, precisions)]


@dataclass
class EvalReport:
    """Evaluation summary; serializes to one canonical JSON document."""

    map: float
    top1_accuracy: float
    n_positive: int
    n_negative: int
    threshold: float
    pr_curve: list[tuple[float, float]]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "map": self.map,
            "top1_accuracy": self.top1_accuracy,
            "n_positive": self.n_positive,
            "n_negative": self.n_negative,
            "threshold": self.threshold,
            "pr_curve": [[r, p] for r, p in self.pr_curve],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def render_table(rows: list[tuple[str, "EvalReport"]]) -> str:
    """Plain-text mAP / Top-1 table, one row per evaluated method."""
    name_width = max([len("Method")] + [len(name) for name, _ in rows])
    lines = [f"{'Method'.ljust(name_width)}  {'mAP':>8}  {'Acc':>8}"]
    for name, report in rows:
        lines.append(
            f"{name.ljust(name_width)}  {report.map:8.4f}  {report.top1_accuracy:8.4f}"
        )
    return "\n".join(lines) + "\n"


def _build_report(
    arrays: _ItemArrays,
    threshold: float,
    warnings: list[str],
    per_clip: bool,
) -> EvalReport:
    n_positive = int(arrays.labels.sum())
    n_negative = arrays.size - n_positive
    if per_clip:
        ap_values = []
        for clip in np.unique(arrays.clips):
            mask = arrays.clips == clip
            sub = _ItemArrays(
                arrays.scores[mask],
                arrays.labels[mask],
                arrays.clips[mask],
                arrays.persons[mask],
                arrays.frames[mask],
            )
            if sub.labels.sum() == 0:
                warnings.append(f"clip {clip} has no positive items; skipped in per-clip mAP")
                continue
            ap_values.append(_ap(sub))
        if not ap_values:
            raise UndefinedMetricError("per-clip mAP undefined: no clip has positive items")
        map_value = float(np.mean(ap_values))
    else:
        map_value = _ap(arrays)
    return EvalReport(
        map=map_value,
        top1_accuracy=_accuracy(arrays, threshold),
        n_positive=n_positive,
        n_negative=n_negative,
        threshold=threshold,
        pr_curve=_pr_curve(arrays),
        warnings=warnings,
    )


def _label_index(labels) -> Mapping[TrackKey, FrameLabelTrack]:
    if isinstance(labels, Mapping):
        return labels
    index: dict[TrackKey, FrameLabelTrack] = {}
    for track in labels:
        if track.key in index:
            raise DataFormatError(f"duplicate label track for {track.key}")
        index[track.key] = track
    return index


def evaluate_lam(
    predictions: Mapping[TrackKey, FrameScoreTrack],
    labels,
    *,
    threshold: float = 0.5,
    missing_predictions: str = "error",
    per_clip: bool = False,
) -> EvalReport:
    """Frame-level evaluation of looking-at-me predictions against labels.

    Every labeled frame is pooled into one ranking. Labeled frames without a
    prediction either abort (missing_predictions="error") or score 0 with a
    warning (missing_predictions="zero").
    """
    if missing_predictions not in ("error", "zero"):
        raise ValueError("missing_predictions must be 'error' or 'zero'")
    label_index = _label_index(labels)
    warnings: list[str] = []
    scores_parts, labels_parts, clips, persons, frames_parts = [], [], [], [], []
    total = 0
    for key in sorted(label_index):
        label_track = label_index[key]
        if len(label_track) == 0:
            continue
        total += len(label_track)
        prediction = predictions.get(key)
        if prediction is None or len(prediction) == 0:
            if missing_predictions == "error":
                raise DataFormatError(f"no prediction track for labeled key {key}")
            warnings.append(
                f"no prediction track for {key}; {len(label_track)} frames scored 0"
            )
            frame_scores = np.zeros(len(label_track))
        else:
            pos = np.searchsorted(prediction.frames, label_track.frames)
            pos_clipped = np.minimum(pos, len(prediction) - 1)
            found = prediction.frames[pos_clipped] == label_track.frames
            n_missing = int((~found).sum())
            if n_missing:
                if missing_predictions == "error":
                    first = int(label_track.frames[np.argmin(found)])
                    raise DataFormatError(
                        f"{n_missing} labeled frames lack predictions for {key} "
                        f"(first: frame {first})"
                    )
                warnings.append(f"{n_missing} labeled frames for {key} scored 0 (no prediction)")
            frame_scores = np.where(found, prediction.scores[pos_clipped], 0.0)
        scores_parts.append(frame_scores)
        labels_parts.append(label_track.labels.astype(np.float64))
        clips.extend([key.clip_id] * len(label_track))
        persons.extend([key.person_id] * len(label_track))
        frames_parts.append(label_track.frames)
    if total == 0:
        raise DataFormatError("no overlapping frames between predictions and labels")
    arrays = _ItemArrays(
        np.concatenate(scores_parts),
        np.concatenate(labels_parts),
        np.array(clips),
        np.array(persons),
        np.concatenate(frames_parts),
    )
    return _build_report(arrays, threshold, warnings, per_clip)


def evaluate_ttm(
    fused: Mapping[TrackKey, FrameScoreTrack],
    segments: Iterable[UtteranceSegment],
    *,
    threshold: float = 0.5,
    per_clip: bool = False,
) -> EvalReport:
    """Frame-level evaluation of talking-to-me scores on labeled segments.

    Every frame a fused track covers inside a labeled segment becomes one
    item carrying the segment's label; frames outside labeled segments are
    ignored. Labeled segments with zero covered frames are excluded with a
    warning.
    """
    labeled = [s for s in segments if s.label is not None]
    warnings: list[str] = []
    scores_parts, labels_parts, clips, persons, frames_parts = [], [], [], [], []
    total = 0
    for segment in sorted(labeled, key=lambda s: (s.key, s.start_frame, s.end_frame)):
        track = fused.get(segment.key)
        if track is not None and len(track):
            lo = int(np.searchsorted(track.frames, segment.start_frame, side="left"))
            hi = int(np.searchsorted(track.frames, segment.end_frame, side="right"))
        else:
            lo = hi = 0
        covered = hi - lo
        if covered == 0:
            warnings.append(
                f"labeled segment {segment.key} "
                f"[{segment.start_frame}, {segment.end_frame}] has no fused coverage; excluded"
            )
            continue
        total += covered
        scores_parts.append(track.scores[lo:hi])
        labels_parts.append(np.full(covered, float(segment.label)))
        clips.extend([segment.key.clip_id] * covered)
        persons.extend([segment.key.person_id] * covered)
        frames_parts.append(track.frames[lo:hi])
    if total == 0:
        raise DataFormatError("no labeled segment frames are covered by the fused tracks")
    arrays = _ItemArrays(
        np.concatenate(scores_parts),
        np.concatenate(labels_parts),
        np.array(clips),
        np.array(persons),
        np.concatenate(frames_parts),
    )
    return _build_report(arrays, threshold, warnings, per_clip)
