"""Seeded synthetic scenarios and brute-force oracles.

The generator builds a small world with known latent structure so that the
toolkit's behavior can be checked end to end without any real recordings:

  * Each (clip, person) timeline is segmented into utterances separated by
    gaps. Each utterance draws a binary talking-to-me label.
  * A latent per-frame gaze state drives the visual scores: frames inside a
    positive utterance show gaze unless averted (gaze_aversion_prob), all
    other frames show no gaze. Aversion also acts at whole-utterance scale:
    a fraction of positive utterances (proportional to gaze_aversion_prob)
    never gazes at all, mirroring speakers who address the wearer without
    looking. Visual scores are the gaze base score plus clipped Gaussian
    noise.
  * Some utterances (and stray outside frames) are visually unreliable, as
    if the face were occluded: those frames retain only a small fraction of
    the gaze signal, so a positive utterance whose face is unusable looks
    visually negative. Face quality reflects the unreliable state with
    probability quality_noise_coupling per frame and is uninformative
    otherwise, which is what makes quality-weighted fusion profitable when
    the coupling is high: low mean quality routes the decision to audio
    exactly where the visual evidence is misleading.
  * Per-utterance audio scores are high for positive segments and low for
    negative ones, except that an audio_fp_rate share of negative segments
    receives a high (false positive) audio score.

All randomness comes from one numpy Generator consumed in fixed
(clip, person, frame) order, so the emitted Dataset is a pure function of
the config (which embeds the seed) and serializes byte-identically.

The oracle functions at the bottom recompute average precision and median
smoothing by explicit enumeration, sharing no code with the main
implementations; tests pit the two against each other.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import io as _io
from .errors import ConfigError, UndefinedMetricError
from .model import (
    Dataset,
    FrameLabelTrack,
    FrameScoreTrack,
    QualityTrack,
    TrackKey,
    UtteranceSegment,
)

_GAZE_SCORE_HI = 0.75
_GAZE_SCORE_LO = 0.1
_AUDIO_SCORE_POS = 0.8
_AUDIO_SCORE_NEG = 0.2
_AUDIO_SCORE_FP = 0.78
_AUDIO_NOISE_SIGMA = 0.05
_UNRELIABLE_RATE = 0.15
_UNRELIABLE_SIGNAL_RETENTION = 0.1  # visual signal surviving an unreliable (occluded) face
_NEVER_GAZE_FACTOR = 0.25  # share of gaze_aversion_prob applied per whole utterance
_QUALITY_LOW = (0.05, 0.35)
_QUALITY_HIGH = (0.65, 0.95)
_QUALITY_ANY = (0.05, 0.95)
_UTTERANCE_FRAMES = (15, 60)
_GAP_FRAMES = (5, 40)


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of the synthetic world; defaults are desk scale (~36k frames)."""

    n_clips: int = 20
    frames_per_clip: int = 900
    persons_per_clip: int = 2
    utterance_rate: float = 5.0
    positive_fraction: float = 0.5
    gaze_aversion_prob: float = 0.3
    audio_fp_rate: float = 0.2
    visual_noise_sigma: float = 0.1
    quality_noise_coupling: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_clips", "frames_per_clip", "persons_per_clip"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("positive_fraction", "gaze_aversion_prob", "audio_fp_rate",
                     "quality_noise_coupling"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= float(value) <= 1.0):
                raise ConfigError(f"{name} must be a probability in [0, 1], got {value!r}")
        if not (isinstance(self.utterance_rate, (int, float)) and self.utterance_rate >= 0.0):
            raise ConfigError(f"utterance_rate must be non-negative, got {self.utterance_rate!r}")
        if not (isinstance(self.visual_noise_sigma, (int, float)) and self.visual_noise_sigma >= 0.0):
            raise ConfigError(
                f"visual_noise_sigma must be non-negative, got {self.visual_noise_sigma!r}"
            )
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not (
            0 <= self.seed < 2**64
        ):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class GroundTruth:
    """Latent truth behind a generated Dataset.

    gaze_states and lam_labels are the same tracks under this generative
    model: the frame label is defined as the latent gaze state.
    """

    lam_labels: list[FrameLabelTrack]
    ttm_segments: list[UtteranceSegment]
    gaze_states: list[FrameLabelTrack]


def generate_scenario(config: ScenarioConfig) -> tuple[Dataset, GroundTruth]:
    """Deterministically generate (Dataset, GroundTruth) for the config."""
    rng = np.random.default_rng(config.seed)
    n_frames = config.frames_per_clip
    frames = np.arange(n_frames, dtype=np.int64)

    visual_tracks: list[FrameScoreTrack] = []
    quality_tracks: list[QualityTrack] = []
    label_tracks: list[FrameLabelTrack] = []
    segments: list[UtteranceSegment] = []

    for clip in range(config.n_clips):
        clip_id = f"clip{clip:04d}"
        for person in range(config.persons_per_clip):
            key = TrackKey(clip_id, f"person{person:02d}")

            # Utterance layout: alternate random gaps and utterances until
            # the timeline or the drawn count is exhausted.
            n_target = int(rng.poisson(config.utterance_rate))
            local_segments: list[tuple[int, int, bool, float, bool, bool]] = []
            cursor = 0
            for _ in range(n_target):
                gap = int(rng.integers(_GAP_FRAMES[0], _GAP_FRAMES[1] + 1))
                length = int(rng.integers(_UTTERANCE_FRAMES[0], _UTTERANCE_FRAMES[1] + 1))
                start = cursor + gap
                end = start + length - 1
                if end >= n_frames:
                    break
                label = bool(rng.random() < config.positive_fraction)
                audio_fp = (not label) and bool(rng.random() < config.audio_fp_rate)
                base_audio = (
                    _AUDIO_SCORE_POS if label
                    else (_AUDIO_SCORE_FP if audio_fp else _AUDIO_SCORE_NEG)
                )
                audio = float(
                    np.clip(base_audio + _AUDIO_NOISE_SIGMA * rng.standard_normal(), 0.0, 1.0)
                )
                unreliable = bool(rng.random() < _UNRELIABLE_RATE)
                never_gaze = label and bool(
                    rng.random() < _NEVER_GAZE_FACTOR * config.gaze_aversion_prob
                )
                local_segments.append((start, end, label, audio, unreliable, never_gaze))
                cursor = end + 1

            gazing_possible = np.zeros(n_frames, dtype=bool)
            in_segment = np.zeros(n_frames, dtype=bool)
            unreliable_seg = np.zeros(n_frames, dtype=bool)
            for start, end, label, _, unreliable, never_gaze in local_segments:
                in_segment[start:end + 1] = True
                if label and not never_gaze:
                    gazing_possible[start:end + 1] = True
                if unreliable:
                    unreliable_seg[start:end + 1] = True

            gaze_draw = rng.random(n_frames)
            gaze = gazing_possible & (gaze_draw < 1.0 - config.gaze_aversion_prob)

            stray_draw = rng.random(n_frames)
            unreliable = np.where(in_segment, unreliable_seg, stray_draw < _UNRELIABLE_RATE)

            noise = rng.standard_normal(n_frames)
            base = np.where(gaze, _GAZE_SCORE_HI, _GAZE_SCORE_LO)
            base = np.where(
                unreliable,
                _GAZE_SCORE_LO + _UNRELIABLE_SIGNAL_RETENTION * (base - _GAZE_SCORE_LO),
                base,
            )
            visual = np.clip(base + config.visual_noise_sigma * noise, 0.0, 1.0)

            informative = rng.random(n_frames) < config.quality_noise_coupling
            q_draw = rng.random(n_frames)
            lo = np.where(unreliable, _QUALITY_LOW[0], _QUALITY_HIGH[0])
            hi = np.where(unreliable, _QUALITY_LOW[1], _QUALITY_HIGH[1])
            informed = lo + q_draw * (hi - lo)
            blind = _QUALITY_ANY[0] + q_draw * (_QUALITY_ANY[1] - _QUALITY_ANY[0])
            quality = np.where(informative, informed, blind)

            visual_tracks.append(FrameScoreTrack(key, frames, visual))
            quality_tracks.append(QualityTrack(key, frames, quality))
            label_tracks.append(FrameLabelTrack(key, frames, gaze.astype(np.uint8)))
            segments.extend(
                UtteranceSegment(key, start, end, audio_score=audio, label=int(label))
                for start, end, label, audio, _, _ in local_segments
            )

    dataset = Dataset()
    dataset.add_score_tracks("visual", visual_tracks)
    dataset.segments.extend(segments)
    dataset.quality.extend(quality_tracks)
    dataset.labels.extend(label_tracks)
    truth = GroundTruth(
        lam_labels=label_tracks,
        ttm_segments=segments,
        gaze_states=label_tracks,
    )
    return dataset, truth


_SCENARIO_FILES = {
    "scores": "scores.jsonl",
    "segments": "segments.jsonl",
    "quality": "quality.jsonl",
    "labels": "labels.jsonl",
}


def write_scenario(dataset: Dataset, config: ScenarioConfig, out_dir: str | Path) -> dict:
    """Write the four canonical files plus a manifest embedding the config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {
        "scores": _io.write_score_file(dataset.scores["visual"], out / _SCENARIO_FILES["scores"]),
        "segments": _io.write_segment_file(dataset.segments, out / _SCENARIO_FILES["segments"]),
        "quality": _io.write_quality_file(dataset.quality, out / _SCENARIO_FILES["quality"]),
        "labels": _io.write_label_file(dataset.labels, out / _SCENARIO_FILES["labels"]),
    }
    manifest = {
        "config": asdict(config),
        "seed": config.seed,
        "files": dict(_SCENARIO_FILES),
        "record_counts": counts,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def oracle_ap(items) -> float:
    """Average precision by explicit enumeration.

    Sorts items by (score descending, tiebreak ascending), then for every
    rank k re-materializes the whole prefix to count positives. Quadratic on
    purpose: it shares no incremental state with the production kernel.
    """
    ordered = sorted(items, key=lambda item: (-item.score, item.tiebreak_key))
    labels = [int(item.label) for item in ordered]
    n_positive = sum(labels)
    if n_positive == 0:
        raise UndefinedMetricError("average precision is undefined with zero positive items")
    total = 0.0
    for k in range(1, len(labels) + 1):
        if labels[k - 1] == 1:
            prefix = labels[:k]
            total += sum(prefix) / k
    return total / n_positive


def oracle_median(track: FrameScoreTrack, window: int) -> FrameScoreTrack:
    """Median smoothing by per-position window materialization and sort."""
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"median window must be an odd positive integer, got {window}")
    scores = [float(s) for s in track.scores]
    half = window // 2
    out = []
    for i in range(len(scores)):
        values = sorted(scores[max(0, i - half):i + half + 1])
        m = len(values)
        if m % 2 == 1:
            out.append(values[m // 2])
        else:
            out.append((values[m // 2 - 1] + values[m // 2]) / 2.0)
    return FrameScoreTrack(track.key, track.frames, out)
