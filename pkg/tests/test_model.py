import numpy as np
import pytest

from egosocial import (
    Dataset,
    DataFormatError,
    FrameLabelTrack,
    FrameScoreTrack,
    QualityTrack,
    TrackKey,
    UtteranceSegment,
)


class TestTrackKey:
    def test_rejects_empty_ids(self):
        with pytest.raises(ValueError):
            TrackKey("", "p")
        with pytest.raises(ValueError):
            TrackKey("c", "")

    @pytest.mark.parametrize("bad", ["a\nb", "a\tb", "a,b", "a\rb"])
    def test_rejects_separator_characters(self, bad):
        with pytest.raises(ValueError):
            TrackKey(bad, "p")
        with pytest.raises(ValueError):
            TrackKey("c", bad)

    def test_ordering_is_lexicographic(self):
        assert TrackKey("a", "z") < TrackKey("b", "a")
        assert TrackKey("a", "a") < TrackKey("a", "b")


class TestFrameScoreTrack:
    def test_strictly_increasing_frames_required(self):
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [0, 0, 1], [0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [2, 1], [0.1, 0.2])

    def test_scores_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [0], [1.2])
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [0], [-0.1])
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [0], [float("nan")])

    def test_negative_frames_rejected(self):
        with pytest.raises(ValueError):
            FrameScoreTrack(TrackKey("c", "p"), [-1, 0], [0.1, 0.2])

    def test_arrays_are_read_only(self):
        track = FrameScoreTrack(TrackKey("c", "p"), [0, 1], [0.1, 0.2])
        with pytest.raises(ValueError):
            track.scores[0] = 0.5

    def test_equality_and_with_scores(self):
        key = TrackKey("c", "p")
        a = FrameScoreTrack(key, [0, 1], [0.1, 0.2])
        b = FrameScoreTrack(key, [0, 1], [0.1, 0.2])
        assert a == b
        c = a.with_scores([0.3, 0.4])
        assert c != a
        assert np.array_equal(c.frames, a.frames)

    def test_empty_track_is_valid(self):
        track = FrameScoreTrack(TrackKey("c", "p"), [], [])
        assert len(track) == 0


class TestUtteranceSegment:
    def test_inverted_interval_rejected(self):
        with pytest.raises(ValueError):
            UtteranceSegment(TrackKey("c", "p"), 5, 4)

    def test_optional_fields_validated(self):
        with pytest.raises(ValueError):
            UtteranceSegment(TrackKey("c", "p"), 0, 1, audio_score=1.5)
        with pytest.raises(ValueError):
            UtteranceSegment(TrackKey("c", "p"), 0, 1, label=2)
        seg = UtteranceSegment(TrackKey("c", "p"), 0, 1)
        assert seg.audio_score is None and seg.label is None

    def test_n_frames_inclusive(self):
        assert UtteranceSegment(TrackKey("c", "p"), 3, 3).n_frames() == 1
        assert UtteranceSegment(TrackKey("c", "p"), 0, 9).n_frames() == 10

    def test_overlaps_inclusive_bounds(self):
        a = UtteranceSegment(TrackKey("c", "p"), 0, 10)
        b = UtteranceSegment(TrackKey("c", "p"), 10, 20)
        c = UtteranceSegment(TrackKey("c", "p"), 11, 20)
        assert a.overlaps(b)
        assert not a.overlaps(c)


class TestLabelAndQualityTracks:
    def test_label_values_binary(self):
        with pytest.raises(ValueError):
            FrameLabelTrack(TrackKey("c", "p"), [0], [2])
        track = FrameLabelTrack(TrackKey("c", "p"), [0, 1], [0, 1])
        assert track.labels.dtype == np.uint8

    def test_quality_range(self):
        with pytest.raises(ValueError):
            QualityTrack(TrackKey("c", "p"), [0], [1.01])


class TestDataset:
    def test_score_index_rejects_duplicates(self):
        key = TrackKey("c", "p")
        ds = Dataset()
        ds.add_score_tracks("m", [FrameScoreTrack(key, [0], [0.1])])
        ds.add_score_tracks("m", [FrameScoreTrack(key, [1], [0.2])])
        with pytest.raises(DataFormatError):
            ds.score_index("m")

    def test_score_index_unknown_source(self):
        with pytest.raises(DataFormatError):
            Dataset().score_index("nope")

    def test_segments_by_key_sorted(self):
        key = TrackKey("c", "p")
        ds = Dataset()
        ds.segments.append(UtteranceSegment(key, 20, 30))
        ds.segments.append(UtteranceSegment(key, 0, 10))
        grouped = ds.segments_by_key()
        assert [s.start_frame for s in grouped[key]] == [0, 20]
