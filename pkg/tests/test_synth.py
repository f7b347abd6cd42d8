import json

import numpy as np
import pytest

from egosocial import (
    ConfigError,
    FrameScoreTrack,
    ScenarioConfig,
    ScoredItem,
    TrackKey,
    UndefinedMetricError,
    evaluate_lam,
    evaluate_ttm,
    generate_scenario,
    oracle_ap,
    oracle_median,
    validate_dataset,
    write_scenario,
)

SMALL = dict(n_clips=2, frames_per_clip=150, persons_per_clip=2, utterance_rate=3.0)


class TestScenarioConfig:
    def test_zero_frames_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(frames_per_clip=0)

    def test_probability_fields_validated(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(gaze_aversion_prob=1.5)
        with pytest.raises(ConfigError):
            ScenarioConfig(audio_fp_rate=-0.1)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(visual_noise_sigma=-1.0)

    def test_seed_range(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(seed=-1)
        with pytest.raises(ConfigError):
            ScenarioConfig(seed=2**64)


class TestGenerateScenario:
    def test_deterministic_per_config_and_seed(self, tmp_path):
        config = ScenarioConfig(**SMALL, seed=99)
        a = tmp_path / "a"
        b = tmp_path / "b"
        ds1, _ = generate_scenario(config)
        ds2, _ = generate_scenario(config)
        write_scenario(ds1, config, a)
        write_scenario(ds2, config, b)
        for name in ("scores.jsonl", "segments.jsonl", "quality.jsonl", "labels.jsonl", "manifest.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_different_seeds_differ(self):
        ds1, _ = generate_scenario(ScenarioConfig(**SMALL, seed=1))
        ds2, _ = generate_scenario(ScenarioConfig(**SMALL, seed=2))
        s1 = ds1.scores["visual"][0].scores
        s2 = ds2.scores["visual"][0].scores
        assert not np.array_equal(s1, s2)

    def test_validates_cleanly_across_seeds(self):
        for seed in range(100):
            config = ScenarioConfig(
                n_clips=1,
                frames_per_clip=120,
                persons_per_clip=1,
                utterance_rate=2.0,
                seed=seed,
            )
            dataset, _ = generate_scenario(config)
            assert validate_dataset(dataset) == []

    def test_every_positive_segment_has_frames(self):
        dataset, truth = generate_scenario(ScenarioConfig(**SMALL, seed=5))
        for segment in truth.ttm_segments:
            assert segment.n_frames() >= 1
            assert segment.label in (0, 1)
            assert 0.0 <= segment.audio_score <= 1.0

    def test_noiseless_configuration_is_separable(self):
        config = ScenarioConfig(
            gaze_aversion_prob=0.0, visual_noise_sigma=0.0, audio_fp_rate=0.0, seed=21
        )
        dataset, truth = generate_scenario(config)
        visual = dataset.score_index("visual")
        assert evaluate_ttm(visual, dataset.segments).map == 1.0
        assert evaluate_lam(visual, dataset.label_index()).map == 1.0

    def test_ground_truth_mirrors_dataset(self):
        dataset, truth = generate_scenario(ScenarioConfig(**SMALL, seed=8))
        assert truth.ttm_segments == dataset.segments
        assert truth.lam_labels == dataset.labels
        assert truth.gaze_states == truth.lam_labels

    def test_manifest_embeds_config_and_seed(self, tmp_path):
        config = ScenarioConfig(**SMALL, seed=123)
        dataset, _ = generate_scenario(config)
        manifest = write_scenario(dataset, config, tmp_path)
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk == manifest
        assert on_disk["seed"] == 123
        assert on_disk["config"]["frames_per_clip"] == SMALL["frames_per_clip"]
        assert set(on_disk["files"]) == {"scores", "segments", "quality", "labels"}


class TestOracleAp:
    def items(self, scores, labels):
        return [
            ScoredItem(s, l, ("c", "p", i)) for i, (s, l) in enumerate(zip(scores, labels))
        ]

    def test_hand_vector(self):
        assert oracle_ap(self.items([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])) == pytest.approx(
            (1 + 2 / 3) / 2
        )

    def test_single_positive_first(self):
        scores = [1.0 - i / 10 for i in range(10)]
        assert oracle_ap(self.items(scores, [1] + [0] * 9)) == 1.0

    def test_single_positive_last(self):
        scores = [1.0 - i / 10 for i in range(10)]
        assert oracle_ap(self.items(scores, [0] * 9 + [1])) == pytest.approx(0.1)

    def test_zero_positives_rejected(self):
        with pytest.raises(UndefinedMetricError):
            oracle_ap(self.items([0.5], [0]))


class TestOracleMedian:
    def track(self, scores):
        return FrameScoreTrack(TrackKey("c", "p"), list(range(len(scores))), scores)

    def test_mirrors_filter_examples(self):
        assert oracle_median(self.track([0.0, 0.0, 1.0, 0.0, 0.0]), 3).scores.tolist() == [0.0] * 5
        assert oracle_median(self.track([0.0, 1.0, 0.0, 1.0, 0.0]), 3).scores.tolist() == [
            0.5,
            0.0,
            1.0,
            0.0,
            0.5,
        ]

    def test_window_one_is_identity(self):
        scores = [0.3, 0.9, 0.1, 0.5]
        assert oracle_median(self.track(scores), 1).scores.tolist() == scores

    def test_single_entry_unchanged(self):
        assert oracle_median(self.track([0.42]), 9).scores.tolist() == [0.42]

    def test_even_window_rejected(self):
        with pytest.raises(ConfigError):
            oracle_median(self.track([0.1]), 2)
