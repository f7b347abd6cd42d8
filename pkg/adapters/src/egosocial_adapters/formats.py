"""Registered upstream dump formats.

Format ids are versioned strings; unknown ids fail loudly rather than being
parsed best-effort. Each format is documented by a fixture under
tests/fixtures/ with the same name.

    lam-json-v1   nested JSON prediction dump:
                  {"version": "lam-json-v1", "model": str?, "clips": [
                      {"clip_uid": str, "persons": [
                          {"person_id": str, "frames": [int], "scores": [num]}]}]}
    lam-csv-v1    CSV with header clip_uid,person_id,frame,score
    fan-csv-v1    face-alignment confidence CSV with header
                  clip_uid,person_id,frame,confidence
    ttm-csv-v1    utterance CSV with header
                  clip_uid,person_id,start_frame,end_frame,audio_score,label
                  (audio_score and label may be empty)
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import InputError, UnknownFormatError

LAM_FORMATS = ("lam-json-v1", "lam-csv-v1")
QUALITY_FORMATS = ("fan-csv-v1",)
TTM_FORMATS = ("ttm-csv-v1",)

FORMATS: dict[str, str] = {
    "lam-json-v1": "nested JSON gaze-prediction dump (clips -> persons -> frames/scores)",
    "lam-csv-v1": "flat CSV gaze-prediction dump (clip_uid,person_id,frame,score)",
    "fan-csv-v1": "face-alignment confidence CSV (clip_uid,person_id,frame,confidence)",
    "ttm-csv-v1": "utterance CSV (clip_uid,person_id,start_frame,end_frame,audio_score,label)",
}


def check_format(format_id: str, allowed: tuple[str, ...]) -> None:
    if format_id not in FORMATS:
        raise UnknownFormatError(
            f"unknown format id {format_id!r}; known: {sorted(FORMATS)}"
        )
    if format_id not in allowed:
        raise UnknownFormatError(
            f"format {format_id!r} is not valid here; expected one of {list(allowed)}"
        )


def _str_field(value, what: str, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise InputError(f"{where}: {what} must be a non-empty string")
    return value


def _int_field(value, what: str, where: str) -> int:
    if isinstance(value, str):
        try:
            value = int(value, 10)
        except ValueError:
            raise InputError(f"{where}: {what} must be an integer, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}: {what} must be an integer, got {value!r}")
    if value < 0:
        raise InputError(f"{where}: {what} must be non-negative, got {value}")
    return value


def _num_field(value, what: str, where: str) -> float:
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise InputError(f"{where}: {what} must be a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: {what} must be a number, got {value!r}")
    value = float(value)
    if value != value:
        raise InputError(f"{where}: {what} must not be NaN")
    return value


def _read_text(path: str | Path) -> str:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    return path.read_text(encoding="utf-8")


def _csv_rows(path: str | Path, required: tuple[str, ...]):
    text = _read_text(path)
    reader = csv.DictReader(text.splitlines())
    if text.strip() and reader.fieldnames is not None:
        missing = set(required) - set(reader.fieldnames)
        if missing:
            raise InputError(f"missing CSV columns: {sorted(missing)}")
    for row in reader:
        yield reader.line_num, row


def read_frame_scores(path: str | Path, format_id: str, value_field_out: str):
    """Yield (where, clip_id, person_id, frame, value) rows for frame dumps."""
    if format_id == "lam-json-v1":
        yield from _read_lam_json(path)
        return
    column = "score" if format_id == "lam-csv-v1" else "confidence"
    for line_num, row in _csv_rows(path, ("clip_uid", "person_id", "frame", column)):
        where = f"row {line_num}"
        yield (
            where,
            _str_field(row.get("clip_uid"), "clip_uid", where),
            _str_field(row.get("person_id"), "person_id", where),
            _int_field(row.get("frame"), "frame", where),
            _num_field(row.get(column), column, where),
        )


def _read_lam_json(path: str | Path):
    try:
        document = json.loads(_read_text(path) or "null")
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if document is None:
        return  # empty file: empty dump
    if not isinstance(document, dict):
        raise InputError("top-level value must be a JSON object")
    if document.get("version") != "lam-json-v1":
        raise InputError(f"dump declares version {document.get('version')!r}, expected 'lam-json-v1'")
    clips = document.get("clips", [])
    if not isinstance(clips, list):
        raise InputError("'clips' must be a list")
    for i, clip in enumerate(clips):
        where = f"clips[{i}]"
        if not isinstance(clip, dict):
            raise InputError(f"{where}: must be an object")
        clip_uid = _str_field(clip.get("clip_uid"), "clip_uid", where)
        persons = clip.get("persons", [])
        if not isinstance(persons, list):
            raise InputError(f"{where}: 'persons' must be a list")
        for j, person in enumerate(persons):
            pwhere = f"{where}.persons[{j}]"
            if not isinstance(person, dict):
                raise InputError(f"{pwhere}: must be an object")
            person_id = _str_field(person.get("person_id"), "person_id", pwhere)
            frames = person.get("frames", [])
            scores = person.get("scores", [])
            if not isinstance(frames, list) or not isinstance(scores, list):
                raise InputError(f"{pwhere}: 'frames' and 'scores' must be lists")
            if len(frames) != len(scores):
                raise InputError(
                    f"{pwhere}: {len(frames)} frames but {len(scores)} scores"
                )
            for k, (frame, score) in enumerate(zip(frames, scores)):
                fwhere = f"{pwhere}.frames[{k}]"
                yield (
                    fwhere,
                    clip_uid,
                    person_id,
                    _int_field(frame, "frame", fwhere),
                    _num_field(score, "score", fwhere),
                )


def read_segments(path: str | Path, format_id: str):
    """Yield (where, clip, person, start, end, audio_score, label) rows."""
    required = ("clip_uid", "person_id", "start_frame", "end_frame")
    for line_num, row in _csv_rows(path, required):
        where = f"row {line_num}"
        audio = row.get("audio_score")
        label = row.get("label")
        label_value = None
        if label not in (None, ""):
            label_value = _int_field(label, "label", where)
            if label_value not in (0, 1):
                raise InputError(f"{where}: label must be 0 or 1, got {label_value}")
        yield (
            where,
            _str_field(row.get("clip_uid"), "clip_uid", where),
            _str_field(row.get("person_id"), "person_id", where),
            _int_field(row.get("start_frame"), "start_frame", where),
            _int_field(row.get("end_frame"), "end_frame", where),
            _num_field(audio, "audio_score", where) if audio not in (None, "") else None,
            label_value,
        )
