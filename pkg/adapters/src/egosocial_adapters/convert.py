"""Converters from upstream dumps to the canonical JSONL record formats.

Each converter writes one canonical output file plus a manifest JSON beside
it (<output>.manifest.json) describing what was converted. Emission matches
the primary toolkit's canonical serialization (records sorted by clip,
person, frame; compact JSON; scores as floats) so converted files round-trip
losslessly through its parsers.

Converters transform dump files only; they never load model weights or media.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import InputError
from .formats import (
    FORMATS,
    LAM_FORMATS,
    QUALITY_FORMATS,
    TTM_FORMATS,
    check_format,
    read_frame_scores,
    read_segments,
)


@dataclass
class AdapterManifest:
    adapter: str
    format: str
    format_description: str
    source_model: str
    input_path: str
    outputs: list[str]
    records_in: int
    records_out: int
    clipped_scores: int = 0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _manifest_path(out_path: Path) -> Path:
    return out_path.with_name(out_path.name + ".manifest.json")


def _clip01(value: float) -> float:
    return 0.0 if value < 0.0 else (1.0 if value > 1.0 else value)


def _write_jsonl(path: Path, records) -> int:
    with open(path, "w", encoding="utf-8") as handle:
        count = 0
        for record in records:
            handle.write(json.dumps(record, separators=(",", ":")))
            handle.write("\n")
            count += 1
    return count


def _convert_frame_values(
    adapter: str,
    input_path: str | Path,
    format_id: str,
    out_path: str | Path,
    value_field: str,
    allowed_formats,
    source_model: str,
) -> AdapterManifest:
    check_format(format_id, allowed_formats)
    out_path = Path(out_path)
    rows = []
    seen: dict[tuple[str, str, int], str] = {}
    clipped = 0
    for where, clip, person, frame, value in read_frame_scores(input_path, format_id, value_field):
        previous = seen.get((clip, person, frame))
        if previous is not None:
            raise InputError(
                f"{where}: duplicate entry for {clip}/{person} frame {frame} "
                f"(first seen at {previous})"
            )
        seen[(clip, person, frame)] = where
        bounded = _clip01(value)
        if bounded != value:
            clipped += 1
        rows.append((clip, person, frame, bounded))
    rows.sort()
    count = _write_jsonl(
        out_path,
        (
            {"clip_id": clip, "person_id": person, "frame": frame, value_field: float(value)}
            for clip, person, frame, value in rows
        ),
    )
    warnings = []
    if clipped:
        warnings.append(f"{clipped} {value_field} value(s) clipped to [0, 1]")
    manifest = AdapterManifest(
        adapter=adapter,
        format=format_id,
        format_description=FORMATS[format_id],
        source_model=source_model,
        input_path=str(input_path),
        outputs=[str(out_path)],
        records_in=len(rows),
        records_out=count,
        clipped_scores=clipped,
        warnings=warnings,
    )
    manifest.write(_manifest_path(out_path))
    return manifest


def convert_lam_predictions(
    input_path: str | Path,
    format_id: str,
    out_path: str | Path,
    source_model: str = "unspecified",
) -> AdapterManifest:
    """Convert a gaze-prediction dump into canonical score records."""
    return _convert_frame_values(
        "lam-predictions", input_path, format_id, out_path, "score", LAM_FORMATS, source_model
    )


def convert_quality_scores(
    input_path: str | Path,
    out_path: str | Path,
    format_id: str = "fan-csv-v1",
    source_model: str = "unspecified",
) -> AdapterManifest:
    """Convert face-alignment confidences into canonical quality records."""
    return _convert_frame_values(
        "quality-scores", input_path, format_id, out_path, "quality", QUALITY_FORMATS, source_model
    )


def convert_ttm_segments(
    input_path: str | Path,
    out_path: str | Path,
    format_id: str = "ttm-csv-v1",
    source_model: str = "unspecified",
) -> AdapterManifest:
    """Convert an utterance dump into canonical segment records."""
    check_format(format_id, TTM_FORMATS)
    out_path = Path(out_path)
    rows = []
    clipped = 0
    for where, clip, person, start, end, audio, label in read_segments(input_path, format_id):
        if start > end:
            raise InputError(f"{where}: start_frame {start} exceeds end_frame {end}")
        if audio is not None:
            bounded = _clip01(audio)
            if bounded != audio:
                clipped += 1
            audio = bounded
        rows.append(((clip, person, start, end), where, audio, label))
    rows.sort(key=lambda item: item[0])
    # overlap check per (clip, person), reporting both offending input rows
    for ((c1, p1, s1, e1), w1, _, _), ((c2, p2, s2, e2), w2, _, _) in zip(rows, rows[1:]):
        if (c1, p1) == (c2, p2) and s2 <= e1:
            raise InputError(
                f"overlapping segments for {c1}/{p1}: "
                f"[{s1}, {e1}] ({w1}) and [{s2}, {e2}] ({w2})"
            )

    def records():
        for (clip, person, start, end), _, audio, label in rows:
            record = {
                "clip_id": clip,
                "person_id": person,
                "start_frame": start,
                "end_frame": end,
            }
            if audio is not None:
                record["audio_score"] = float(audio)
            if label is not None:
                record["label"] = label
            yield record

    count = _write_jsonl(out_path, records())
    warnings = []
    if clipped:
        warnings.append(f"{clipped} audio_score value(s) clipped to [0, 1]")
    manifest = AdapterManifest(
        adapter="ttm-segments",
        format=format_id,
        format_description=FORMATS[format_id],
        source_model=source_model,
        input_path=str(input_path),
        outputs=[str(out_path)],
        records_in=len(rows),
        records_out=count,
        clipped_scores=clipped,
        warnings=warnings,
    )
    manifest.write(_manifest_path(out_path))
    return manifest
