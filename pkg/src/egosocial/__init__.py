"""Late fusion, temporal filtering, and evaluation for social-interaction score tracks."""

from .errors import (
    ConfigError,
    CoverageError,
    DataFormatError,
    EgosocialError,
    KeyMismatchError,
    UndefinedMetricError,
)
from .filters import (
    MedianConfig,
    SegmentVisualScore,
    broadcast_segment_scores,
    max_score_filter,
    median_filter,
    segment_frame_domain,
    segment_mean_quality,
)
from .fusion import (
    EnsembleSpec,
    FusionMethod,
    FusionResult,
    ensemble_sources,
    ensemble_tracks,
    fuse_segment,
    fuse_tracks,
    fuse_ttm,
)
from .io import (
    load_dataset,
    parse_label_file,
    parse_quality_file,
    parse_score_file,
    parse_segment_file,
    write_label_file,
    write_quality_file,
    write_score_file,
    write_segment_file,
    write_segment_scores,
)
from .metrics import (
    EvalReport,
    ScoredItem,
    average_precision,
    evaluate_lam,
    evaluate_ttm,
    render_table,
    top1_accuracy,
)
from .model import (
    Dataset,
    FrameLabelTrack,
    FrameScoreTrack,
    QualityTrack,
    TrackKey,
    UtteranceSegment,
)
from .pipeline import PipelineConfig, run_pipeline
from .synth import (
    GroundTruth,
    ScenarioConfig,
    generate_scenario,
    oracle_ap,
    oracle_median,
    write_scenario,
)
from .validate import Violation, count_errors, validate_dataset

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CoverageError",
    "DataFormatError",
    "Dataset",
    "EgosocialError",
    "EnsembleSpec",
    "EvalReport",
    "FrameLabelTrack",
    "FrameScoreTrack",
    "FusionMethod",
    "FusionResult",
    "GroundTruth",
    "KeyMismatchError",
    "MedianConfig",
    "PipelineConfig",
    "QualityTrack",
    "ScenarioConfig",
    "ScoredItem",
    "SegmentVisualScore",
    "TrackKey",
    "UndefinedMetricError",
    "UtteranceSegment",
    "Violation",
    "average_precision",
    "broadcast_segment_scores",
    "count_errors",
    "ensemble_sources",
    "ensemble_tracks",
    "evaluate_lam",
    "evaluate_ttm",
    "fuse_segment",
    "fuse_tracks",
    "fuse_ttm",
    "generate_scenario",
    "load_dataset",
    "max_score_filter",
    "median_filter",
    "oracle_ap",
    "oracle_median",
    "parse_label_file",
    "parse_quality_file",
    "parse_score_file",
    "parse_segment_file",
    "render_table",
    "run_pipeline",
    "segment_frame_domain",
    "segment_mean_quality",
    "top1_accuracy",
    "validate_dataset",
    "write_label_file",
    "write_quality_file",
    "write_scenario",
    "write_score_file",
    "write_segment_file",
    "write_segment_scores",
]
