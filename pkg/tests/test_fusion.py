import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egosocial import (
    ConfigError,
    DataFormatError,
    Dataset,
    EnsembleSpec,
    FrameScoreTrack,
    FusionMethod,
    KeyMismatchError,
    MedianConfig,
    QualityTrack,
    TrackKey,
    UtteranceSegment,
    ensemble_sources,
    ensemble_tracks,
    fuse_segment,
    fuse_ttm,
)

KEY = TrackKey("clip", "person")
unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def track(scores, frames=None, key=KEY):
    frames = list(range(len(scores))) if frames is None else frames
    return FrameScoreTrack(key, frames, scores)


class TestFuseSegment:
    def test_full_quality_returns_visual(self):
        assert fuse_segment(0.8, 0.1, 1.0, FusionMethod.QUALITY_WEIGHTED) == 0.8

    def test_zero_quality_returns_audio(self):
        assert fuse_segment(0.8, 0.1, 0.0, FusionMethod.QUALITY_WEIGHTED) == 0.1

    def test_half_quality_arithmetic(self):
        assert fuse_segment(0.8, 0.4, 0.5, FusionMethod.QUALITY_WEIGHTED) == pytest.approx(0.6)

    def test_average(self):
        assert fuse_segment(0.8, 0.4, 0.0, FusionMethod.AVERAGE) == pytest.approx(0.6)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            fuse_segment(1.2, 0.5, 0.5, FusionMethod.AVERAGE)
        with pytest.raises(ValueError):
            fuse_segment(0.5, -0.1, 0.5, FusionMethod.AVERAGE)
        with pytest.raises(ValueError):
            fuse_segment(0.5, 0.5, 1.5, FusionMethod.QUALITY_WEIGHTED)

    @settings(max_examples=200, deadline=None)
    @given(
        visual=st.integers(min_value=0, max_value=2**53).map(lambda n: n / 2**53),
        audio=st.integers(min_value=0, max_value=2**53).map(lambda n: n / 2**53),
    )
    def test_half_quality_equals_average_exactly(self, visual, audio):
        # halving is exact for any score on the 2^-53 grid (subnormals, which no
        # parser or rng produces, are the only values that can underflow it)
        qw = fuse_segment(visual, audio, 0.5, FusionMethod.QUALITY_WEIGHTED)
        avg = fuse_segment(visual, audio, 0.5, FusionMethod.AVERAGE)
        assert qw == avg

    @settings(max_examples=100, deadline=None)
    @given(visual=unit_floats, audio=unit_floats, quality=unit_floats)
    def test_convex_combination_bounds(self, visual, audio, quality):
        fused = fuse_segment(visual, audio, quality, FusionMethod.QUALITY_WEIGHTED)
        assert min(visual, audio) - 1e-15 <= fused <= max(visual, audio) + 1e-15

    @settings(max_examples=100, deadline=None)
    @given(
        v1=unit_floats, v2=unit_floats, audio=unit_floats, quality=unit_floats,
        method=st.sampled_from(list(FusionMethod)),
    )
    def test_monotone_in_visual(self, v1, v2, audio, quality, method):
        lo, hi = sorted([v1, v2])
        assert fuse_segment(lo, audio, quality, method) <= fuse_segment(hi, audio, quality, method)

    @settings(max_examples=100, deadline=None)
    @given(
        visual=unit_floats, a1=unit_floats, a2=unit_floats, quality=unit_floats,
        method=st.sampled_from(list(FusionMethod)),
    )
    def test_monotone_in_audio(self, visual, a1, a2, quality, method):
        lo, hi = sorted([a1, a2])
        assert fuse_segment(visual, lo, quality, method) <= fuse_segment(visual, hi, quality, method)


class TestEnsembleSpec:
    def test_empty_sources_rejected(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(())

    def test_weight_length_mismatch(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(("a", "b"), (1.0,))

    def test_negative_or_zero_sum_weights_rejected(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(("a",), (-1.0,))
        with pytest.raises(ConfigError):
            EnsembleSpec(("a", "b"), (0.0, 0.0))

    def test_normalization(self):
        spec = EnsembleSpec(("a", "b"), (2.0, 6.0))
        assert spec.normalized_weights() == (0.25, 0.75)
        assert EnsembleSpec(("a", "b")).normalized_weights() == (0.5, 0.5)


class TestEnsembleTracks:
    def test_identical_tracks_fixed_point(self):
        t = track([0.2, 0.8, 0.5])
        out = ensemble_tracks([t, t], EnsembleSpec(("a", "b")))
        assert np.array_equal(out.scores, t.scores)

    def test_equal_weights_mean(self):
        out = ensemble_tracks(
            [track([0.2]), track([0.8])], EnsembleSpec(("a", "b"))
        )
        assert out.scores.tolist() == [0.5]

    def test_degenerate_weights_select_first(self):
        a, b = track([0.21, 0.37]), track([0.9, 0.9])
        out = ensemble_tracks([a, b], EnsembleSpec(("a", "b"), (1.0, 0.0)))
        assert np.array_equal(out.scores, a.scores)

    def test_permutation_invariant_bitwise(self):
        rng = np.random.default_rng(5)
        tracks = [track(rng.random(40)) for _ in range(3)]
        weights = (0.2, 0.3, 0.5)
        fwd = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c"), weights))
        rev = ensemble_tracks(
            list(reversed(tracks)), EnsembleSpec(("c", "b", "a"), tuple(reversed(weights)))
        )
        assert np.array_equal(fwd.scores, rev.scores)

    def test_power_of_two_weight_scaling_bit_identical(self):
        rng = np.random.default_rng(6)
        tracks = [track(rng.random(40)) for _ in range(3)]
        base = (0.1, 0.2, 0.7)
        out1 = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c"), base))
        for factor in (0.5, 2.0, 8.0):
            scaled = tuple(w * factor for w in base)
            out2 = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c"), scaled))
            assert np.array_equal(out1.scores, out2.scores)

    def test_arbitrary_weight_scaling_close(self):
        rng = np.random.default_rng(7)
        tracks = [track(rng.random(40)) for _ in range(3)]
        base = (0.1, 0.2, 0.7)
        out1 = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c"), base))
        out2 = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c"), tuple(w * 3.7 for w in base)))
        np.testing.assert_allclose(out1.scores, out2.scores, atol=1e-15)

    def test_bounded_by_member_min_max(self):
        rng = np.random.default_rng(8)
        columns = [rng.random(60) for _ in range(4)]
        tracks = [track(c) for c in columns]
        out = ensemble_tracks(tracks, EnsembleSpec(("a", "b", "c", "d"), (0.1, 0.4, 0.3, 0.2)))
        stacked = np.stack(columns)
        assert np.all(out.scores >= stacked.min(axis=0))
        assert np.all(out.scores <= stacked.max(axis=0))

    def test_strict_domain_mismatch_rejected(self):
        a = track([0.1, 0.2], frames=[0, 1])
        b = track([0.1, 0.2], frames=[0, 2])
        with pytest.raises(DataFormatError):
            ensemble_tracks([a, b], EnsembleSpec(("a", "b")))

    def test_intersect_drops_non_shared_frames(self):
        a = track([0.2, 0.4, 0.6], frames=[0, 1, 2])
        b = track([0.4, 0.8], frames=[1, 3])
        out = ensemble_tracks([a, b], EnsembleSpec(("a", "b")), align="intersect")
        assert out.frames.tolist() == [1]
        assert out.scores.tolist() == [0.4]

    def test_key_mismatch_rejected(self):
        a = track([0.5])
        b = track([0.5], key=TrackKey("other", "p"))
        with pytest.raises(KeyMismatchError):
            ensemble_tracks([a, b], EnsembleSpec(("a", "b")))

    def test_unknown_align_mode(self):
        with pytest.raises(ConfigError):
            ensemble_tracks([track([0.5])], EnsembleSpec(("a",)), align="bogus")


class TestEnsembleSources:
    def test_strict_requires_identical_key_sets(self):
        other = TrackKey("other", "p")
        indexes = {
            "a": {KEY: track([0.5]), other: track([0.5], key=other)},
            "b": {KEY: track([0.7])},
        }
        with pytest.raises(DataFormatError):
            ensemble_sources(indexes, EnsembleSpec(("a", "b")))
        out = ensemble_sources(indexes, EnsembleSpec(("a", "b")), align="intersect")
        assert set(out) == {KEY}

    def test_missing_source_rejected(self):
        with pytest.raises(DataFormatError):
            ensemble_sources({"a": {}}, EnsembleSpec(("a", "zz")))


def tiny_dataset(quality_values=(0.5, 0.5), audio=0.5, with_quality=True, label=1):
    ds = Dataset()
    ds.add_score_tracks("visual", [track([0.2, 0.9], frames=[0, 1])])
    ds.segments.append(UtteranceSegment(KEY, 0, 1, audio_score=audio, label=label))
    if with_quality:
        ds.quality.append(QualityTrack(KEY, [0, 1], list(quality_values)))
    return ds


class TestFuseTtm:
    def test_composed_hand_example(self):
        # max(0.2, 0.9) = 0.9; mean quality 0.5; 0.5*0.9 + 0.5*0.5 = 0.7
        ds = tiny_dataset()
        result = fuse_ttm(ds, "visual", FusionMethod.QUALITY_WEIGHTED)
        [fused] = result.tracks.values()
        assert fused.frames.tolist() == [0, 1]
        assert fused.scores.tolist() == [0.7, 0.7]

    def test_average_equals_quality_weighted_at_half(self):
        ds = tiny_dataset(quality_values=(0.3, 0.7), audio=0.42)  # mean quality 0.5
        avg = fuse_ttm(ds, "visual", FusionMethod.AVERAGE)
        qw = fuse_ttm(ds, "visual", FusionMethod.QUALITY_WEIGHTED)
        [a] = avg.tracks.values()
        [q] = qw.tracks.values()
        assert np.array_equal(a.scores, q.scores)

    def test_average_needs_no_quality(self):
        ds = tiny_dataset(with_quality=False)
        result = fuse_ttm(ds, "visual", FusionMethod.AVERAGE)
        [fused] = result.tracks.values()
        assert fused.scores.tolist() == [0.7, 0.7]

    def test_quality_weighted_missing_quality_track_fails(self):
        ds = tiny_dataset(with_quality=False)
        with pytest.raises(DataFormatError):
            fuse_ttm(ds, "visual", FusionMethod.QUALITY_WEIGHTED)

    def test_missing_audio_falls_back_to_visual(self):
        ds = tiny_dataset()
        ds.segments[0] = UtteranceSegment(KEY, 0, 1, audio_score=None, label=1)
        result = fuse_ttm(ds, "visual", FusionMethod.QUALITY_WEIGHTED)
        [fused] = result.tracks.values()
        assert fused.scores.tolist() == [0.9, 0.9]
        assert any("audio_score" in w for w in result.warnings)

    def test_empty_dataset_empty_output(self):
        ds = Dataset()
        ds.add_score_tracks("visual", [])
        result = fuse_ttm(ds, "visual", FusionMethod.AVERAGE)
        assert result.tracks == {}

    def test_visual_without_segments_warns(self):
        ds = tiny_dataset()
        lonely = TrackKey("clip", "lonely")
        ds.add_score_tracks("visual", [track([0.5], key=lonely)])
        result = fuse_ttm(ds, "visual", FusionMethod.AVERAGE)
        assert any("no segments" in w for w in result.warnings)
        assert lonely not in result.tracks

    def test_segments_without_visual_track_warn_and_score_zero(self):
        ds = tiny_dataset()
        orphan = TrackKey("clip", "orphan")
        ds.segments.append(UtteranceSegment(orphan, 0, 1, audio_score=0.6, label=0))
        ds.quality.append(QualityTrack(orphan, [0, 1], [1.0, 1.0]))
        result = fuse_ttm(ds, "visual", FusionMethod.QUALITY_WEIGHTED)
        assert any("no visual track" in w for w in result.warnings)
        # empty visual gives segment score 0; mean quality 1.0 weights it fully
        orphan_track = result.tracks[orphan]
        assert orphan_track.scores.tolist() == [0.0, 0.0]

    def test_median_applied_after_broadcast(self):
        ds = Dataset()
        ds.add_score_tracks("visual", [track([0.0, 0.0, 1.0, 0.0, 0.0], frames=[0, 1, 2, 3, 4])])
        # single-frame segments so each keeps its own frame's score
        for f in range(5):
            ds.segments.append(
                UtteranceSegment(KEY, f, f, audio_score=None, label=0)
            )
        smoothed = fuse_ttm(ds, "visual", FusionMethod.AVERAGE, MedianConfig(3))
        [fused] = smoothed.tracks.values()
        assert fused.scores.tolist() == [0.0, 0.0, 0.0, 0.0, 0.0]
