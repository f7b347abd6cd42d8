"""Command-line interface.

Subcommands are composable so failures can be bisected stage by stage:

    egosocial validate     check canonical files, report violations as JSON
    egosocial filter       median smoothing / utterance max-score filter
    egosocial fuse         audio-visual fusion per utterance segment
    egosocial ensemble     weighted mean of several score files
    egosocial eval         lam / ttm evaluation reports
    egosocial synth        seeded synthetic scenario generator
    egosocial pipeline     run a full config-driven pipeline

Logs go to stderr; machine-readable data goes to --out or stdout. Exit
codes: 0 success, 1 configuration error, 2 missing input file, 3 data
validation failure, 4 undefined metric.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as _io
from .errors import (
    ConfigError,
    CoverageError,
    DataFormatError,
    EgosocialError,
    KeyMismatchError,
    UndefinedMetricError,
)
from .filters import MedianConfig, max_score_filter, median_filter
from .fusion import EnsembleSpec, FusionMethod, ensemble_sources, fuse_tracks
from .metrics import evaluate_lam, evaluate_ttm, render_table
from .model import FrameScoreTrack
from .pipeline import PipelineConfig, run_pipeline
from .synth import ScenarioConfig, generate_scenario, write_scenario
from .validate import count_errors, validate_dataset

log = logging.getLogger("egosocial")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING_FILE = 2
EXIT_VALIDATION = 3
EXIT_UNDEFINED_METRIC = 4


class _Parser(argparse.ArgumentParser):
    # Usage errors are configuration errors, so exit 1 (argparse defaults to 2,
    # which this CLI reserves for missing input files).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _score_paths(values: list[str] | None) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for value in values or []:
        name, sep, path = value.partition("=")
        if not sep:
            name, path = "default", value
        if not name or not path:
            raise ConfigError(f"bad --scores value {value!r}; expected name=path")
        if name in out:
            raise ConfigError(f"duplicate score source {name!r}")
        out[name] = Path(path)
    return out


def _single_score_path(values: list[str] | None) -> tuple[str, Path]:
    paths = _score_paths(values)
    if len(paths) != 1:
        raise ConfigError("exactly one --scores input is required here")
    return next(iter(paths.items()))


def _check_exists(*paths) -> None:
    for path in paths:
        if path is not None and not Path(path).exists():
            raise FileNotFoundError(str(path))


def _fmt(args) -> str:
    return "csv" if args.csv else "jsonl"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _parse_weights(value: str | None) -> tuple[float, ...] | None:
    if value is None:
        return None
    try:
        return tuple(float(part) for part in value.split(","))
    except ValueError:
        raise ConfigError(f"bad --weights value {value!r}; expected comma-separated numbers")


def _cmd_validate(args) -> int:
    paths = _score_paths(args.scores)
    _check_exists(*paths.values(), args.segments, args.quality, args.labels)
    dataset = _io.load_dataset(
        paths, segments=args.segments, quality=args.quality, labels=args.labels, fmt=_fmt(args)
    )
    violations = validate_dataset(dataset)
    n_errors = count_errors(violations)
    document = {
        "violations": [v.to_dict() for v in violations],
        "n_errors": n_errors,
        "n_warnings": len(violations) - n_errors,
    }
    _emit(json.dumps(document, indent=2, sort_keys=True) + "\n", args.out)
    if n_errors:
        log.error("validation found %d error(s)", n_errors)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_filter_median(args) -> int:
    _, path = _single_score_path(args.scores)
    _check_exists(path)
    config = MedianConfig(args.window)
    tracks = _io.parse_score_file(path, fmt=_fmt(args))
    smoothed = [median_filter(track, config) for track in tracks]
    _write_tracks(smoothed, args.out)
    return EXIT_OK


def _cmd_filter_maxseg(args) -> int:
    _, path = _single_score_path(args.scores)
    _check_exists(path, args.segments)
    tracks = {t.key: t for t in _io.parse_score_file(path, fmt=_fmt(args))}
    segments = _io.parse_segment_file(args.segments, fmt=_fmt(args))
    grouped: dict = {}
    for segment in segments:
        grouped.setdefault(segment.key, []).append(segment)
    segment_scores = []
    for key in sorted(grouped):
        track = tracks.get(key)
        if track is None:
            log.warning("no score track for %s; segment scores default to 0", key)
            track = FrameScoreTrack(key, np.empty(0, dtype=np.int64), np.empty(0))
        segment_scores.extend(max_score_filter(track, grouped[key]))
    if args.out is None:
        _io.write_segment_scores(segment_scores, sys.stdout)
    else:
        _io.write_segment_scores(segment_scores, args.out)
    return EXIT_OK


def _write_tracks(tracks, out: str | None) -> None:
    if out is None:
        _io.write_score_file(tracks, sys.stdout)
    else:
        _io.write_score_file(tracks, out)


def _cmd_fuse(args) -> int:
    _, path = _single_score_path(args.scores)
    _check_exists(path, args.segments, args.quality)
    method = FusionMethod(args.method)
    visual = {t.key: t for t in _io.parse_score_file(path, fmt=_fmt(args))}
    segments = _io.parse_segment_file(args.segments, fmt=_fmt(args))
    quality = {}
    if args.quality is not None:
        quality = {t.key: t for t in _io.parse_quality_file(args.quality, fmt=_fmt(args))}
    median = MedianConfig(args.window) if args.window is not None else None
    result = fuse_tracks(visual, segments, quality, method, median)
    for warning in result.warnings:
        log.warning("%s", warning)
    _write_tracks(result.tracks.values(), args.out)
    return EXIT_OK


def _cmd_ensemble(args) -> int:
    paths = _score_paths(args.scores)
    if len(paths) < 1:
        raise ConfigError("ensemble requires at least one --scores input")
    _check_exists(*paths.values())
    indexes = {
        name: {t.key: t for t in _io.parse_score_file(path, fmt=_fmt(args))}
        for name, path in paths.items()
    }
    spec = EnsembleSpec(tuple(paths), _parse_weights(args.weights))
    combined = ensemble_sources(indexes, spec, align=args.align)
    _write_tracks(combined.values(), args.out)
    return EXIT_OK


def _emit_report(report, args) -> None:
    if args.format == "table":
        _emit(render_table([(args.task, report)]), args.out)
    else:
        _emit(report.to_json(), args.out)


def _cmd_eval(args) -> int:
    _, path = _single_score_path(args.scores)
    if args.task == "lam":
        _check_exists(path, args.labels)
        predictions = {t.key: t for t in _io.parse_score_file(path, fmt=_fmt(args))}
        labels = _io.parse_label_file(args.labels, fmt=_fmt(args))
        report = evaluate_lam(
            predictions,
            labels,
            threshold=args.threshold,
            missing_predictions=args.missing_pred,
            per_clip=args.per_clip,
        )
    else:
        _check_exists(path, args.segments)
        fused = {t.key: t for t in _io.parse_score_file(path, fmt=_fmt(args))}
        segments = _io.parse_segment_file(args.segments, fmt=_fmt(args))
        report = evaluate_ttm(
            fused, segments, threshold=args.threshold, per_clip=args.per_clip
        )
    for warning in report.warnings:
        log.warning("%s", warning)
    _emit_report(report, args)
    return EXIT_OK


def _cmd_synth_gen(args) -> int:
    config = ScenarioConfig(
        n_clips=args.n_clips,
        frames_per_clip=args.frames_per_clip,
        persons_per_clip=args.persons_per_clip,
        utterance_rate=args.utterance_rate,
        positive_fraction=args.positive_fraction,
        gaze_aversion_prob=args.gaze_aversion_prob,
        audio_fp_rate=args.audio_fp_rate,
        visual_noise_sigma=args.visual_noise_sigma,
        quality_noise_coupling=args.quality_noise_coupling,
        seed=args.seed,
    )
    dataset, _ = generate_scenario(config)
    manifest = write_scenario(dataset, config, args.out_dir)
    log.info(
        "wrote scenario to %s (%d score records)",
        args.out_dir,
        manifest["record_counts"]["scores"],
    )
    return EXIT_OK


def _cmd_pipeline_run(args) -> int:
    config = PipelineConfig.from_file(args.config)
    report = run_pipeline(config)
    for warning in report.warnings:
        log.warning("%s", warning)
    if config.report_path is None:
        sys.stdout.write(report.to_json())
    return EXIT_OK


def _add_common_io(parser, *, scores_help: str) -> None:
    parser.add_argument(
        "--scores",
        action="append",
        metavar="NAME=PATH",
        help=scores_help,
    )
    parser.add_argument("--csv", action="store_true", help="inputs are CSV, not JSONL")
    parser.add_argument("--out", metavar="PATH", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="egosocial", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="validate canonical input files")
    _add_common_io(p, scores_help="score file to validate (repeatable)")
    p.add_argument("--segments", metavar="PATH")
    p.add_argument("--quality", metavar="PATH")
    p.add_argument("--labels", metavar="PATH")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("filter", help="temporal filters")
    fsub = p.add_subparsers(dest="filter_command", required=True, parser_class=_Parser)

    fp = fsub.add_parser("median", help="median-smooth score tracks")
    _add_common_io(fp, scores_help="score file to smooth")
    fp.add_argument("--window", type=int, default=5, help="odd window size (default 5)")
    fp.set_defaults(func=_cmd_filter_median)

    fp = fsub.add_parser("maxseg", help="utterance-level max-score filter")
    _add_common_io(fp, scores_help="visual score file")
    fp.add_argument("--segments", required=True, metavar="PATH")
    fp.set_defaults(func=_cmd_filter_maxseg)

    p = sub.add_parser("fuse", help="fuse visual scores with segment audio scores")
    _add_common_io(p, scores_help="visual score file")
    p.add_argument("--segments", required=True, metavar="PATH")
    p.add_argument("--quality", metavar="PATH")
    p.add_argument(
        "--method",
        choices=[m.value for m in FusionMethod],
        default=FusionMethod.QUALITY_WEIGHTED.value,
    )
    p.add_argument("--window", type=int, default=5, help="median window after fusion (default 5)")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("ensemble", help="weighted mean of several score files")
    _add_common_io(p, scores_help="score file per source (repeatable)")
    p.add_argument("--weights", metavar="W1,W2,...", help="weights matching --scores order")
    p.add_argument("--align", choices=["strict", "intersect"], default="strict")
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("eval", help="evaluation reports")
    esub = p.add_subparsers(dest="task", required=True, parser_class=_Parser)
    for task in ("lam", "ttm"):
        ep = esub.add_parser(task, help=f"{task} evaluation")
        _add_common_io(ep, scores_help="prediction score file")
        if task == "lam":
            ep.add_argument("--labels", required=True, metavar="PATH")
            ep.add_argument("--missing-pred", choices=["error", "zero"], default="error")
        else:
            ep.add_argument("--segments", required=True, metavar="PATH")
        ep.add_argument("--threshold", type=float, default=0.5)
        ep.add_argument("--per-clip", action="store_true", help="mean of per-clip APs")
        ep.add_argument("--format", choices=["json", "table"], default="json")
        ep.set_defaults(func=_cmd_eval, task=task)

    p = sub.add_parser("synth", help="synthetic scenarios")
    ssub = p.add_subparsers(dest="synth_command", required=True, parser_class=_Parser)
    sp = ssub.add_parser("gen", help="generate one seeded scenario")
    sp.add_argument("--out-dir", required=True, metavar="DIR")
    defaults = ScenarioConfig()
    sp.add_argument("--n-clips", type=int, default=defaults.n_clips)
    sp.add_argument("--frames-per-clip", type=int, default=defaults.frames_per_clip)
    sp.add_argument("--persons-per-clip", type=int, default=defaults.persons_per_clip)
    sp.add_argument("--utterance-rate", type=float, default=defaults.utterance_rate)
    sp.add_argument("--positive-fraction", type=float, default=defaults.positive_fraction)
    sp.add_argument("--gaze-aversion-prob", type=float, default=defaults.gaze_aversion_prob)
    sp.add_argument("--audio-fp-rate", type=float, default=defaults.audio_fp_rate)
    sp.add_argument("--visual-noise-sigma", type=float, default=defaults.visual_noise_sigma)
    sp.add_argument("--quality-noise-coupling", type=float, default=defaults.quality_noise_coupling)
    sp.add_argument("--seed", type=int, default=defaults.seed)
    sp.set_defaults(func=_cmd_synth_gen)

    p = sub.add_parser("pipeline", help="config-driven pipelines")
    psub = p.add_subparsers(dest="pipeline_command", required=True, parser_class=_Parser)
    pp = psub.add_parser("run", help="run a pipeline config")
    pp.add_argument("--config", required=True, metavar="PATH")
    pp.set_defaults(func=_cmd_pipeline_run)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (DataFormatError, KeyMismatchError, CoverageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED_METRIC
    except EgosocialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
