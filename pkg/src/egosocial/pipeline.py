"""Config-driven orchestration of ensemble, filter, fusion, and eval stages.

A pipeline config is a JSON document:

    {
      "task": "ttm",
      "inputs": {
        "scores": {"visual": "scores.jsonl"},
        "segments": "segments.jsonl",
        "quality": "quality.jsonl",
        "labels": null
      },
      "stages": [
        {"stage": "fuse", "method": "quality_weighted"},
        {"stage": "median", "window": 5},
        {"stage": "eval"}
      ],
      "out": {"report": "report.json", "dump_dir": null},
      "format": "jsonl"
    }

Relative paths resolve against the config file's directory. Stages operate
on a current set of tracks: "ensemble" combines loaded sources, "median"
smooths, "max_filter" replaces each track with its utterance-level
broadcast, "fuse" combines the current tracks (as the visual side) with
segment audio scores, and "eval" (always last) produces the report. The
whole run is a pure function of the config and input bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import io as _io
from .errors import ConfigError
from .filters import (
    MedianConfig,
    broadcast_segment_scores,
    max_score_filter,
    median_filter,
    segment_frame_domain,
)
from .fusion import EnsembleSpec, FusionMethod, ensemble_sources, fuse_tracks
from .metrics import EvalReport, evaluate_lam, evaluate_ttm

_TASKS = ("lam", "ttm")
_STAGE_PARAMS = {
    "ensemble": {"sources", "weights", "align"},
    "median": {"window"},
    "max_filter": set(),
    "fuse": {"method", "window"},
    "eval": {"threshold", "per_clip", "missing_predictions"},
}


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class PipelineConfig:
    task: str
    scores: dict[str, Path]
    stages: tuple[dict[str, Any], ...]
    segments: Path | None = None
    quality: Path | None = None
    labels: Path | None = None
    report_path: Path | None = None
    dump_dir: Path | None = None
    input_format: str = "jsonl"

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], base_dir: Path | None = None) -> "PipelineConfig":
        base = Path(base_dir) if base_dir is not None else Path.cwd()

        def resolve(value):
            if value is None:
                return None
            _expect(isinstance(value, str) and bool(value), f"expected a path string, got {value!r}")
            path = Path(value)
            return path if path.is_absolute() else base / path

        _expect(isinstance(raw, Mapping), "pipeline config must be a JSON object")
        unknown = set(raw) - {"task", "inputs", "stages", "out", "format"}
        _expect(not unknown, f"unknown config keys: {sorted(unknown)}")

        task = raw.get("task")
        _expect(task in _TASKS, f"task must be one of {_TASKS}, got {task!r}")

        inputs = raw.get("inputs")
        _expect(isinstance(inputs, Mapping), "inputs must be an object")
        unknown = set(inputs) - {"scores", "segments", "quality", "labels"}
        _expect(not unknown, f"unknown input keys: {sorted(unknown)}")
        score_paths = inputs.get("scores")
        _expect(
            isinstance(score_paths, Mapping) and len(score_paths) > 0,
            "inputs.scores must map at least one source name to a path",
        )
        scores = {}
        for name, path in score_paths.items():
            _expect(isinstance(name, str) and bool(name), f"bad score source name {name!r}")
            scores[name] = resolve(path)

        stages_raw = raw.get("stages")
        _expect(
            isinstance(stages_raw, list) and len(stages_raw) > 0,
            "stages must be a non-empty list",
        )
        stages = []
        for i, stage in enumerate(stages_raw):
            _expect(isinstance(stage, Mapping), f"stage {i} must be an object")
            name = stage.get("stage")
            _expect(name in _STAGE_PARAMS, f"stage {i}: unknown stage {name!r}")
            params = set(stage) - {"stage"}
            unknown = params - _STAGE_PARAMS[name]
            _expect(not unknown, f"stage {i} ({name}): unknown parameters {sorted(unknown)}")
            stages.append(dict(stage))

        names = [stage["stage"] for stage in stages]
        _expect(names.count("eval") == 1, "exactly one eval stage is required")
        _expect(names[-1] == "eval", "the eval stage must come last")
        if task == "lam":
            _expect(
                "fuse" not in names and "max_filter" not in names,
                "fuse and max_filter stages are only valid in ttm pipelines",
            )
            _expect(inputs.get("labels"), "lam pipelines require inputs.labels")
        else:
            _expect(inputs.get("segments"), "ttm pipelines require inputs.segments")
            for stage in stages:
                if stage["stage"] == "fuse" and stage.get("method") == "quality_weighted":
                    _expect(
                        inputs.get("quality"),
                        "quality_weighted fusion requires inputs.quality",
                    )
        for stage in stages:
            if "window" in stage:
                MedianConfig(stage["window"])  # validates; raises ConfigError
            if stage["stage"] == "fuse":
                method = stage.get("method")
                _expect(
                    method in tuple(m.value for m in FusionMethod),
                    f"fuse stage requires method in {[m.value for m in FusionMethod]}",
                )
            if stage["stage"] == "ensemble":
                sources = stage.get("sources", list(scores))
                _expect(
                    isinstance(sources, list) and all(s in scores for s in sources),
                    "ensemble sources must name loaded score inputs",
                )

        out = raw.get("out") or {}
        _expect(isinstance(out, Mapping), "out must be an object")
        unknown = set(out) - {"report", "dump_dir"}
        _expect(not unknown, f"unknown out keys: {sorted(unknown)}")

        input_format = raw.get("format", "jsonl")
        _expect(input_format in ("jsonl", "csv"), f"unknown format {input_format!r}")

        return cls(
            task=task,
            scores=scores,
            stages=tuple(stages),
            segments=resolve(inputs.get("segments")),
            quality=resolve(inputs.get("quality")),
            labels=resolve(inputs.get("labels")),
            report_path=resolve(out.get("report")),
            dump_dir=resolve(out.get("dump_dir")),
            input_format=input_format,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(str(path))
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc
        return cls.from_dict(raw, base_dir=path.parent)


def run_pipeline(config: PipelineConfig) -> EvalReport:
    """Execute the configured stages and write the report. Deterministic."""
    for path in [*config.scores.values(), config.segments, config.quality, config.labels]:
        if path is not None and not Path(path).exists():
            raise FileNotFoundError(str(path))

    dataset = _io.load_dataset(
        config.scores,
        segments=config.segments,
        quality=config.quality,
        labels=config.labels,
        fmt=config.input_format,
    )
    indexes = {source: dataset.score_index(source) for source in config.scores}
    segments_by_key = dataset.segments_by_key()
    quality_index = dataset.quality_index()
    label_index = dataset.label_index()

    current = indexes[next(iter(indexes))] if len(indexes) == 1 else None
    collected_warnings: list[str] = []
    report: EvalReport | None = None

    for i, stage in enumerate(config.stages):
        name = stage["stage"]
        if name == "ensemble":
            sources = tuple(stage.get("sources", list(config.scores)))
            weights = stage.get("weights")
            spec = EnsembleSpec(sources, tuple(weights) if weights is not None else None)
            current = ensemble_sources(indexes, spec, align=stage.get("align", "strict"))
        elif current is None:
            raise ConfigError(
                "multiple score sources are loaded; an ensemble stage must combine them first"
            )
        elif name == "median":
            cfg = MedianConfig(stage.get("window", 5))
            current = {key: median_filter(track, cfg) for key, track in current.items()}
        elif name == "max_filter":
            filtered = {}
            for key in sorted(current):
                segs = segments_by_key.get(key)
                if not segs:
                    collected_warnings.append(f"track {key} has no segments and was dropped")
                    continue
                segment_scores = max_score_filter(current[key], segs)
                filtered[key] = broadcast_segment_scores(
                    segment_scores, segment_frame_domain(segs)
                )
            current = filtered
        elif name == "fuse":
            window = stage.get("window")
            result = fuse_tracks(
                current,
                dataset.segments,
                quality_index,
                FusionMethod(stage["method"]),
                MedianConfig(window) if window is not None else None,
            )
            collected_warnings.extend(result.warnings)
            current = result.tracks
        elif name == "eval":
            if config.task == "lam":
                report = evaluate_lam(
                    current,
                    label_index,
                    threshold=stage.get("threshold", 0.5),
                    missing_predictions=stage.get("missing_predictions", "error"),
                    per_clip=bool(stage.get("per_clip", False)),
                )
            else:
                report = evaluate_ttm(
                    current,
                    dataset.segments,
                    threshold=stage.get("threshold", 0.5),
                    per_clip=bool(stage.get("per_clip", False)),
                )
        if config.dump_dir is not None and name != "eval":
            dump_dir = Path(config.dump_dir)
            dump_dir.mkdir(parents=True, exist_ok=True)
            _io.write_score_file(current.values(), dump_dir / f"stage{i:02d}_{name}.jsonl")

    assert report is not None  # guaranteed by config validation
    report.warnings = collected_warnings + report.warnings
    if config.report_path is not None:
        Path(config.report_path).write_text(report.to_json(), encoding="utf-8")
    return report
