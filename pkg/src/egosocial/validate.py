"""Dataset-level validation.

Re-checks every type invariant defensively and cross-references segments
against the loaded tracks. Violations are returned as data, never raised:
severity "error" marks broken invariants, "warning" marks consistency gaps
(e.g. segment frames without quality entries) that downstream operations
handle gracefully.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import Dataset, TrackKey

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    severity: str
    code: str
    message: str

    def to_dict(self) -> dict:
        return asdict(self)


def _check_frame_series(out, frames, values, lo_ok, what: str) -> None:
    if frames.size > 1 and not np.all(np.diff(frames) > 0):
        out.append(Violation(ERROR, "unsorted-frames", f"{what}: frame indices not strictly increasing"))
    if frames.size and int(frames[0]) < 0:
        out.append(Violation(ERROR, "negative-frame", f"{what}: negative frame index"))
    if values.size and not lo_ok(values):
        out.append(Violation(ERROR, "value-range", f"{what}: values outside the permitted range"))


def _unit_ok(values) -> bool:
    return bool(np.all(np.isfinite(values.astype(np.float64))) and values.min() >= 0 and values.max() <= 1)


def _binary_ok(values) -> bool:
    return bool(np.all((values == 0) | (values == 1)))


def validate_dataset(dataset: Dataset) -> list[Violation]:
    out: list[Violation] = []

    keys_with_scores: set[TrackKey] = set()
    for source in sorted(dataset.scores):
        seen: set[TrackKey] = set()
        for track in dataset.scores[source]:
            what = f"score track {track.key} (source {source!r})"
            if track.key in seen:
                out.append(Violation(ERROR, "duplicate-track", f"duplicate {what}"))
            seen.add(track.key)
            keys_with_scores.add(track.key)
            _check_frame_series(out, track.frames, track.scores, _unit_ok, what)

    quality_by_key = {}
    seen_quality: set[TrackKey] = set()
    for track in dataset.quality:
        what = f"quality track {track.key}"
        if track.key in seen_quality:
            out.append(Violation(ERROR, "duplicate-quality-track", f"duplicate {what}"))
        else:
            quality_by_key[track.key] = track
        seen_quality.add(track.key)
        _check_frame_series(out, track.frames, track.quality, _unit_ok, what)

    seen_labels: set[TrackKey] = set()
    for track in dataset.labels:
        what = f"label track {track.key}"
        if track.key in seen_labels:
            out.append(Violation(ERROR, "duplicate-label-track", f"duplicate {what}"))
        seen_labels.add(track.key)
        _check_frame_series(out, track.frames, track.labels, _binary_ok, what)

    grouped = dataset.segments_by_key()
    for key in sorted(grouped):
        segments = grouped[key]
        for prev, cur in zip(segments, segments[1:]):
            if cur.start_frame <= prev.end_frame:
                out.append(
                    Violation(
                        ERROR,
                        "segment-overlap",
                        f"overlapping segments for {key}: "
                        f"[{prev.start_frame}, {prev.end_frame}] and "
                        f"[{cur.start_frame}, {cur.end_frame}]",
                    )
                )
        if dataset.scores and key not in keys_with_scores:
            out.append(
                Violation(
                    WARNING,
                    "segment-without-track",
                    f"segments for {key} have no score track in any source",
                )
            )
        quality = quality_by_key.get(key)
        if dataset.quality and quality is None:
            out.append(
                Violation(WARNING, "quality-missing", f"no quality track for segment key {key}")
            )
        elif quality is not None:
            for segment in segments:
                lo = int(np.searchsorted(quality.frames, segment.start_frame, side="left"))
                hi = int(np.searchsorted(quality.frames, segment.end_frame, side="right"))
                missing = segment.n_frames() - (hi - lo)
                if missing > 0:
                    out.append(
                        Violation(
                            WARNING,
                            "quality-gap",
                            f"segment {key} [{segment.start_frame}, {segment.end_frame}] "
                            f"lacks quality entries for {missing} frames",
                        )
                    )
    return out


def count_errors(violations: list[Violation]) -> int:
    return sum(1 for v in violations if v.severity == ERROR)
