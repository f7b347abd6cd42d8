"""Ingestion and serialization of the canonical record formats.

The wire format is line-delimited JSON, one record per line:

    score:   {"clip_id": str, "person_id": str, "frame": int, "score": num}
    segment: {"clip_id": str, "person_id": str, "start_frame": int,
              "end_frame": int, "audio_score": num?, "label": 0|1?}
    quality: {"clip_id": str, "person_id": str, "frame": int, "quality": num}
    label:   {"clip_id": str, "person_id": str, "frame": int, "label": 0|1}

A CSV alternative with the same field names is accepted behind ``fmt="csv"``.
Parsers group records into tracks, sort entries by frame, and reject
inconsistent input naming the offending line. Input line order never matters.
Writers emit records sorted by (clip_id, person_id, frame) with full float
round-trip precision, so serialization is deterministic and lossless.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .errors import DataFormatError
from .model import (
    Dataset,
    FrameLabelTrack,
    FrameScoreTrack,
    QualityTrack,
    TrackKey,
    UtteranceSegment,
)

_FORMATS = ("jsonl", "csv")


@contextmanager
def _open_read(source):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            yield handle
    else:
        yield source


@contextmanager
def _open_write(dest):
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as handle:
            yield handle
    else:
        yield dest


def _iter_jsonl(stream: IO[str]) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        if not isinstance(record, dict):
            raise DataFormatError("record must be a JSON object", line=lineno)
        yield lineno, record


def _iter_csv(stream: IO[str]) -> Iterator[tuple[int, dict]]:
    reader = csv.DictReader(stream)
    for row in reader:
        lineno = reader.line_num
        record = {
            name: value
            for name, value in row.items()
            if name is not None and value is not None and value != ""
        }
        yield lineno, record


def _iter_records(source, fmt: str) -> Iterator[tuple[int, dict]]:
    if fmt not in _FORMATS:
        raise DataFormatError(f"unknown input format {fmt!r}; expected one of {_FORMATS}")
    with _open_read(source) as stream:
        iterator = _iter_jsonl(stream) if fmt == "jsonl" else _iter_csv(stream)
        yield from iterator


def _req_str(record: dict, name: str, lineno: int) -> str:
    if name not in record:
        raise DataFormatError(f"missing field {name!r}", line=lineno)
    value = record[name]
    if not isinstance(value, str) or not value:
        raise DataFormatError(f"field {name!r} must be a non-empty string", line=lineno)
    return value


def _req_int(record: dict, name: str, lineno: int) -> int:
    if name not in record:
        raise DataFormatError(f"missing field {name!r}", line=lineno)
    value = record[name]
    if isinstance(value, str):
        try:
            value = int(value, 10)
        except ValueError:
            raise DataFormatError(f"field {name!r} must be an integer", line=lineno) from None
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataFormatError(f"field {name!r} must be an integer", line=lineno)
    if value < 0:
        raise DataFormatError(f"field {name!r} must be non-negative", line=lineno)
    return value


def _unit_float(record: dict, name: str, lineno: int) -> float:
    if name not in record:
        raise DataFormatError(f"missing field {name!r}", line=lineno)
    value = record[name]
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise DataFormatError(f"field {name!r} must be a number", line=lineno) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataFormatError(f"field {name!r} must be a number", line=lineno)
    value = float(value)
    if not (value == value and 0.0 <= value <= 1.0):
        raise DataFormatError(f"field {name!r} must lie in [0, 1]", line=lineno)
    return value


def _binary(record: dict, name: str, lineno: int) -> int:
    value = record[name]
    if isinstance(value, str):
        if value not in ("0", "1"):
            raise DataFormatError(f"field {name!r} must be 0 or 1", line=lineno)
        return int(value)
    if isinstance(value, bool) or value not in (0, 1):
        raise DataFormatError(f"field {name!r} must be 0 or 1", line=lineno)
    return int(value)


def _record_key(record: dict, lineno: int) -> TrackKey:
    clip_id = _req_str(record, "clip_id", lineno)
    person_id = _req_str(record, "person_id", lineno)
    try:
        return TrackKey(clip_id, person_id)
    except ValueError as exc:
        raise DataFormatError(str(exc), line=lineno) from exc


def _parse_frame_series(source, fmt: str, value_field: str, extract):
    """Shared frame-series parser; extract pulls the value off a record."""
    per_key: dict[TrackKey, list[tuple[int, float]]] = defaultdict(list)
    first_line: dict[tuple[TrackKey, int], int] = {}
    for lineno, record in _iter_records(source, fmt):
        key = _record_key(record, lineno)
        frame = _req_int(record, "frame", lineno)
        value = extract(record, value_field, lineno)
        previous = first_line.get((key, frame))
        if previous is not None:
            raise DataFormatError(
                f"duplicate entry for {key} frame {frame} (first seen on line {previous})",
                line=lineno,
            )
        first_line[(key, frame)] = lineno
        per_key[key].append((frame, value))
    result = []
    for key in sorted(per_key):
        entries = sorted(per_key[key])
        frames = [frame for frame, _ in entries]
        values = [value for _, value in entries]
        result.append((key, frames, values))
    return result


def parse_score_file(source, *, fmt: str = "jsonl") -> list[FrameScoreTrack]:
    """Parse score records into tracks grouped by key and sorted by frame."""
    return [
        FrameScoreTrack(key, frames, values)
        for key, frames, values in _parse_frame_series(source, fmt, "score", _unit_float)
    ]


def parse_quality_file(source, *, fmt: str = "jsonl") -> list[QualityTrack]:
    return [
        QualityTrack(key, frames, values)
        for key, frames, values in _parse_frame_series(source, fmt, "quality", _unit_float)
    ]


def parse_label_file(source, *, fmt: str = "jsonl") -> list[FrameLabelTrack]:
    def extract(record, name, lineno):
        if name not in record:
            raise DataFormatError(f"missing field {name!r}", line=lineno)
        return _binary(record, name, lineno)

    return [
        FrameLabelTrack(key, frames, values)
        for key, frames, values in _parse_frame_series(source, fmt, "label", extract)
    ]


def parse_segment_file(source, *, fmt: str = "jsonl") -> list[UtteranceSegment]:
    """Parse segment records; overlapping segments for one key are rejected."""
    per_key: dict[TrackKey, list[tuple[UtteranceSegment, int]]] = defaultdict(list)
    for lineno, record in _iter_records(source, fmt):
        key = _record_key(record, lineno)
        start = _req_int(record, "start_frame", lineno)
        end = _req_int(record, "end_frame", lineno)
        if start > end:
            raise DataFormatError(
                f"start_frame {start} exceeds end_frame {end} for {key}", line=lineno
            )
        audio = _unit_float(record, "audio_score", lineno) if "audio_score" in record else None
        label = _binary(record, "label", lineno) if "label" in record else None
        per_key[key].append((UtteranceSegment(key, start, end, audio, label), lineno))
    segments: list[UtteranceSegment] = []
    for key in sorted(per_key):
        rows = sorted(per_key[key], key=lambda item: (item[0].start_frame, item[0].end_frame))
        for (prev, prev_line), (cur, cur_line) in zip(rows, rows[1:]):
            if cur.start_frame <= prev.end_frame:
                raise DataFormatError(
                    f"overlapping segments for {key}: "
                    f"[{prev.start_frame}, {prev.end_frame}] (line {prev_line}) and "
                    f"[{cur.start_frame}, {cur.end_frame}]",
                    line=cur_line,
                )
        segments.extend(segment for segment, _ in rows)
    return segments


def _dump_jsonl(stream: IO[str], records: Iterable[dict]) -> int:
    count = 0
    for record in records:
        stream.write(json.dumps(record, separators=(",", ":")))
        stream.write("\n")
        count += 1
    return count


def _dump_csv(stream: IO[str], records: Iterable[dict], fields: tuple[str, ...]) -> int:
    writer = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    count = 0
    for record in records:
        writer.writerow({name: record.get(name, "") for name in fields})
        count += 1
    return count


def _write_records(dest, records, fields: tuple[str, ...], fmt: str) -> int:
    if fmt not in _FORMATS:
        raise DataFormatError(f"unknown output format {fmt!r}; expected one of {_FORMATS}")
    with _open_write(dest) as stream:
        if fmt == "jsonl":
            return _dump_jsonl(stream, records)
        return _dump_csv(stream, records, fields)


def _track_records(tracks, value_field: str, values_of) -> Iterator[dict]:
    for track in sorted(tracks, key=lambda t: t.key):
        for frame, value in values_of(track):
            yield {
                "clip_id": track.key.clip_id,
                "person_id": track.key.person_id,
                "frame": frame,
                value_field: value,
            }


def write_score_file(tracks: Iterable[FrameScoreTrack], dest, *, fmt: str = "jsonl") -> int:
    records = _track_records(tracks, "score", lambda t: t.entries())
    return _write_records(dest, records, ("clip_id", "person_id", "frame", "score"), fmt)


def write_quality_file(tracks: Iterable[QualityTrack], dest, *, fmt: str = "jsonl") -> int:
    records = _track_records(tracks, "quality", lambda t: t.entries())
    return _write_records(dest, records, ("clip_id", "person_id", "frame", "quality"), fmt)


def write_label_file(tracks: Iterable[FrameLabelTrack], dest, *, fmt: str = "jsonl") -> int:
    records = _track_records(tracks, "label", lambda t: t.entries())
    return _write_records(dest, records, ("clip_id", "person_id", "frame", "label"), fmt)


def _segment_record(segment: UtteranceSegment) -> dict:
    record = {
        "clip_id": segment.key.clip_id,
        "person_id": segment.key.person_id,
        "start_frame": segment.start_frame,
        "end_frame": segment.end_frame,
    }
    if segment.audio_score is not None:
        record["audio_score"] = segment.audio_score
    if segment.label is not None:
        record["label"] = segment.label
    return record


_SEGMENT_FIELDS = ("clip_id", "person_id", "start_frame", "end_frame", "audio_score", "label")


def write_segment_file(segments: Iterable[UtteranceSegment], dest, *, fmt: str = "jsonl") -> int:
    ordered = sorted(segments, key=lambda s: (s.key, s.start_frame, s.end_frame))
    return _write_records(dest, (_segment_record(s) for s in ordered), _SEGMENT_FIELDS, fmt)


def write_segment_scores(segment_scores, dest, *, fmt: str = "jsonl") -> int:
    """Serialize per-segment scores as segment records plus score fields."""

    def records():
        ordered = sorted(
            segment_scores,
            key=lambda sv: (sv.segment.key, sv.segment.start_frame, sv.segment.end_frame),
        )
        for sv in ordered:
            record = _segment_record(sv.segment)
            record["visual_score"] = sv.visual_score
            record["n_frames_covered"] = sv.n_frames_covered
            yield record

    fields = _SEGMENT_FIELDS + ("visual_score", "n_frames_covered")
    return _write_records(dest, records(), fields, fmt)


def load_dataset(
    score_paths: Mapping[str, str | Path] | None = None,
    *,
    segments: str | Path | None = None,
    quality: str | Path | None = None,
    labels: str | Path | None = None,
    fmt: str = "jsonl",
) -> Dataset:
    """Load any subset of the four canonical files into one Dataset."""
    dataset = Dataset()
    for source, path in (score_paths or {}).items():
        dataset.add_score_tracks(source, parse_score_file(path, fmt=fmt))
    if segments is not None:
        dataset.segments.extend(parse_segment_file(segments, fmt=fmt))
    if quality is not None:
        dataset.quality.extend(parse_quality_file(quality, fmt=fmt))
    if labels is not None:
        dataset.labels.extend(parse_label_file(labels, fmt=fmt))
    return dataset
