import json
from pathlib import Path

import pytest

from egosocial_adapters import (
    InputError,
    UnknownFormatError,
    convert_lam_predictions,
    convert_quality_scores,
    convert_ttm_segments,
)

FIXTURES = Path(__file__).parent / "fixtures"


def read_lines(path):
    text = path.read_text()
    return [json.loads(line) for line in text.splitlines()]


class TestLamConversion:
    def test_minimal_fixture_converts_sorted(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        manifest = convert_lam_predictions(FIXTURES / "lam_predictions_v1.json", "lam-json-v1", out)
        records = read_lines(out)
        assert len(records) == 6
        keys = [(r["clip_id"], r["person_id"], r["frame"]) for r in records]
        assert keys == sorted(keys)
        assert manifest.records_out == 6
        assert manifest.clipped_scores == 0
        assert manifest.source_model == "unspecified"

    def test_manifest_count_matches_emitted_lines(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        manifest = convert_lam_predictions(FIXTURES / "lam_predictions_v1.json", "lam-json-v1", out)
        assert manifest.records_out == len(out.read_text().splitlines())
        on_disk = json.loads((tmp_path / "scores.jsonl.manifest.json").read_text())
        assert on_disk == manifest.to_dict()

    def test_out_of_range_scores_clipped_with_warning(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        manifest = convert_lam_predictions(
            FIXTURES / "lam_predictions_clipped_v1.json", "lam-json-v1", out
        )
        records = read_lines(out)
        assert [r["score"] for r in records] == [0.0, 0.5, 1.0]
        assert manifest.clipped_scores == 2
        assert any("clipped" in w for w in manifest.warnings)

    def test_empty_input_gives_empty_output_and_zero_counts(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        manifest = convert_lam_predictions(
            FIXTURES / "lam_predictions_empty_v1.json", "lam-json-v1", out
        )
        assert out.read_text() == ""
        assert manifest.records_in == 0
        assert manifest.records_out == 0

    def test_csv_flavor(self, tmp_path):
        out = tmp_path / "scores.jsonl"
        manifest = convert_lam_predictions(
            FIXTURES / "lam_predictions_v1.csv", "lam-csv-v1", out, source_model="gaze-lstm"
        )
        records = read_lines(out)
        assert [r["frame"] for r in records] == [0, 3, 5]
        assert manifest.source_model == "gaze-lstm"

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(UnknownFormatError):
            convert_lam_predictions(
                FIXTURES / "lam_predictions_v1.json", "lam-json-v99", tmp_path / "x.jsonl"
            )
        with pytest.raises(UnknownFormatError):
            convert_lam_predictions(
                FIXTURES / "lam_predictions_v1.json", "fan-csv-v1", tmp_path / "x.jsonl"
            )

    def test_duplicate_frames_rejected(self, tmp_path):
        dump = tmp_path / "dump.csv"
        dump.write_text(
            "clip_uid,person_id,frame,score\nc,p,1,0.5\nc,p,1,0.6\n"
        )
        with pytest.raises(InputError) as exc:
            convert_lam_predictions(dump, "lam-csv-v1", tmp_path / "x.jsonl")
        assert "duplicate" in str(exc.value)

    def test_unparseable_input_rejected(self, tmp_path):
        dump = tmp_path / "dump.json"
        dump.write_text("{not json")
        with pytest.raises(InputError):
            convert_lam_predictions(dump, "lam-json-v1", tmp_path / "x.jsonl")

    def test_wrong_declared_version_rejected(self, tmp_path):
        dump = tmp_path / "dump.json"
        dump.write_text('{"version": "lam-json-v2", "clips": []}')
        with pytest.raises(InputError):
            convert_lam_predictions(dump, "lam-json-v1", tmp_path / "x.jsonl")

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            convert_lam_predictions(tmp_path / "nope.json", "lam-json-v1", tmp_path / "x.jsonl")


class TestQualityConversion:
    def test_fixture_converts(self, tmp_path):
        out = tmp_path / "quality.jsonl"
        manifest = convert_quality_scores(FIXTURES / "fan_quality_v1.csv", out)
        records = read_lines(out)
        assert len(records) == 149
        assert all("quality" in r for r in records)
        assert manifest.adapter == "quality-scores"
        assert manifest.records_out == 149


class TestTtmConversion:
    def test_disjoint_utterances_convert(self, tmp_path):
        out = tmp_path / "segments.jsonl"
        manifest = convert_ttm_segments(FIXTURES / "ttm_segments_v1.csv", out)
        records = read_lines(out)
        assert len(records) == 4
        assert manifest.records_out == 4

    def test_optional_fields_absent_when_empty(self, tmp_path):
        out = tmp_path / "segments.jsonl"
        convert_ttm_segments(FIXTURES / "ttm_segments_v1.csv", out)
        records = read_lines(out)
        by_start = {r["start_frame"]: r for r in records}
        assert "audio_score" not in by_start[10]
        assert by_start[10]["label"] == 1
        assert "label" not in by_start[40]
        assert by_start[40]["audio_score"] == 0.66

    def test_overlap_rejected_with_both_rows(self, tmp_path):
        with pytest.raises(InputError) as exc:
            convert_ttm_segments(FIXTURES / "ttm_segments_overlap_v1.csv", tmp_path / "x.jsonl")
        message = str(exc.value)
        assert "row 2" in message and "row 3" in message

    def test_inverted_interval_rejected(self, tmp_path):
        with pytest.raises(InputError) as exc:
            convert_ttm_segments(FIXTURES / "ttm_segments_inverted_v1.csv", tmp_path / "x.jsonl")
        assert "exceeds" in str(exc.value)
