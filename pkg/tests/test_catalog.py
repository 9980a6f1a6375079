import json
import math
from datetime import timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from divex.catalog import (
    CatalogSnapshot,
    FrameSampleRecord,
    Granularity,
    ItemKey,
    ShotRecord,
    VideoRecord,
    implied_frame_count,
    load_manifest,
    parse_creation_time,
    read_catalog_records,
    round_half_up,
    validate_shots,
    write_catalog_records,
)
from divex.errors import (
    BadItemKeyError,
    CatalogFormatError,
    DuplicateVideoError,
    ManifestError,
    OrdinalOutOfRangeError,
    UnknownVideoError,
)


class TestRounding:
    def test_half_rounds_up(self):
        assert round_half_up(2.5) == 3

    def test_below_half_rounds_down(self):
        assert round_half_up(2.4) == 2
        assert round_half_up(0.0) == 0

    def test_implied_frame_count(self):
        assert implied_frame_count(10.0, 2.0) == 20
        assert implied_frame_count(2.5, 3.0) == 8
        assert implied_frame_count(29.97, 1.0) == 30

    @given(st.floats(min_value=0.0, max_value=1e6, allow_nan=False))
    def test_against_floor_formula(self, x):
        assert round_half_up(x) == math.floor(x + 0.5)


class TestCreationTime:
    def test_z_suffix(self):
        dt = parse_creation_time("2009-06-15T12:00:00Z")
        assert dt.utcoffset().total_seconds() == 0
        assert (dt.year, dt.hour) == (2009, 12)

    def test_explicit_offset(self):
        dt = parse_creation_time("2009-06-15T12:00:00+02:00")
        assert dt.astimezone(timezone.utc).hour == 10

    def test_naive_becomes_utc(self):
        dt = parse_creation_time("2009-06-15T12:00:00")
        assert dt.tzinfo is timezone.utc

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_creation_time("last tuesday")


class TestItemKey:
    def test_canonical_shot(self):
        assert ItemKey.shot("v1", 0).canonical() == "v:v1/s:0"

    def test_canonical_frame(self):
        assert ItemKey.frame("v1", 12).canonical() == "v:v1/f:12"

    def test_parse_round_trip(self):
        for text in ("v:v1/s:0", "v:clip/f:31", "v:a/b/c/s:2"):
            assert ItemKey.parse(text).canonical() == text

    def test_video_id_with_slash_parses_greedily(self):
        key = ItemKey.parse("v:a/s:1/s:2")
        assert key.video_id == "a/s:1"
        assert key.ordinal == 2

    @pytest.mark.parametrize(
        "bad", ["", "v:/s:0", "v:v1/x:0", "v:v1/s:01", "v:v1/s:-1", "v:v1/s:", "s:0", "v:v1/s:1.5"]
    )
    def test_malformed_rejected(self, bad):
        with pytest.raises(BadItemKeyError):
            ItemKey.parse(bad)

    @given(
        st.text(min_size=1).filter(lambda s: "\n" not in s),
        st.sampled_from([Granularity.SHOT, Granularity.FRAME]),
        st.integers(min_value=0, max_value=10**9),
    )
    def test_round_trip_any_video_id(self, video_id, granularity, ordinal):
        key = ItemKey(granularity, video_id, ordinal)
        parsed = ItemKey.parse(key.canonical())
        assert parsed == key


class TestVideoRecord:
    def make(self, **kw):
        base = dict(
            video_id="v1",
            frame_path="/tmp/frames",
            fps=10.0,
            duration_sec=2.0,
            creation_time="2009-06-15T12:00:00Z",
            title="t",
            description="d",
        )
        base.update(kw)
        return VideoRecord(**base)

    def test_frame_count(self):
        assert self.make().frame_count == 20

    def test_rejects_nonpositive_fps(self):
        with pytest.raises(ValueError):
            self.make(fps=0.0).validate()

    def test_rejects_nonpositive_duration(self):
        with pytest.raises(ValueError):
            self.make(duration_sec=-1.0).validate()

    def test_rejects_bad_creation_time(self):
        with pytest.raises(ValueError):
            self.make(creation_time="noon").validate()


class TestShotValidation:
    def video(self):
        return VideoRecord("v1", "/x", 10.0, 2.0, "2009-01-01T00:00:00Z", "", "")

    def shots(self, bounds):
        return [
            ShotRecord("v1", i, a, b, (a + b) // 2)
            for i, (a, b) in enumerate(bounds)
        ]

    def test_partition_accepted(self):
        validate_shots(self.video(), self.shots([(0, 9), (10, 19)]))

    def test_gap_rejected(self):
        with pytest.raises(ValueError):
            validate_shots(self.video(), self.shots([(0, 8), (10, 19)]))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            validate_shots(self.video(), self.shots([(0, 10), (10, 19)]))

    def test_wrong_end_rejected(self):
        with pytest.raises(ValueError):
            validate_shots(self.video(), self.shots([(0, 9), (10, 18)]))

    def test_keyframe_outside_rejected(self):
        bad = [ShotRecord("v1", 0, 0, 9, 12), ShotRecord("v1", 1, 10, 19, 14)]
        with pytest.raises(ValueError):
            validate_shots(self.video(), bad)


class TestResolve:
    def test_resolves_shot_and_frame(self, snapshot):
        shot = snapshot.resolve(ItemKey.shot("v1", 1))
        assert (shot.shot.start_frame, shot.shot.end_frame) == (10, 19)
        frame = snapshot.resolve(ItemKey.frame("v3", 1))
        assert frame.sample.frame_index == 3

    def test_unknown_video(self, snapshot):
        with pytest.raises(UnknownVideoError):
            snapshot.resolve(ItemKey.shot("nope", 0))

    def test_ordinal_out_of_range(self, snapshot):
        with pytest.raises(OrdinalOutOfRangeError):
            snapshot.resolve(ItemKey.shot("v1", 2))
        with pytest.raises(OrdinalOutOfRangeError):
            snapshot.resolve(ItemKey.frame("v1", 5))

    def test_shot_for_frame_index(self, snapshot):
        assert snapshot.shot_for_frame_index("v1", 9).shot_index == 0
        assert snapshot.shot_for_frame_index("v1", 10).shot_index == 1
        assert snapshot.shot_for_frame_index("v1", 99) is None


class TestManifest:
    def write(self, tmp_path, rows):
        path = tmp_path / "manifest.jsonl"
        path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
        return str(path)

    def row(self, **kw):
        base = dict(
            videoId="v1",
            framePath="frames/v1",
            fps=10.0,
            durationSec=2.0,
            creationTime="2009-06-15T12:00:00Z",
            title="t",
            description="d",
        )
        base.update(kw)
        return base

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(str(tmp_path / "nope.jsonl"))

    def test_missing_field_names_line(self, tmp_path):
        row = self.row()
        del row["fps"]
        with pytest.raises(ManifestError) as err:
            load_manifest(self.write(tmp_path, [row]))
        assert err.value.line == 1

    def test_unknown_field_rejected(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(self.write(tmp_path, [self.row(codec="h264")]))

    def test_duplicate_id(self, corpus, tmp_path):
        import shutil

        shutil.copytree(f"{corpus.root}/frames/v1", tmp_path / "frames" / "v1")
        rows = [self.row(), self.row()]
        with pytest.raises(DuplicateVideoError):
            load_manifest(self.write(tmp_path, rows))

    def test_frame_count_mismatch(self, corpus, tmp_path):
        import shutil

        shutil.copytree(f"{corpus.root}/frames/v1", tmp_path / "frames" / "v1")
        with pytest.raises(ManifestError):
            load_manifest(self.write(tmp_path, [self.row(durationSec=3.0)]))

    def test_frame_path_resolved_against_manifest_dir(self, corpus):
        videos = load_manifest(corpus.manifest_path)
        assert all(v.frame_path.startswith("/") for v in videos)

    def test_fixture_manifest_loads(self, corpus):
        videos = load_manifest(corpus.manifest_path)
        assert [v.video_id for v in videos] == ["v1", "v2", "v3"]


class TestCatalogRoundTrip:
    def test_records_round_trip(self, snapshot, tmp_path):
        write_catalog_records(str(tmp_path), snapshot.videos, snapshot.shots, snapshot.samples)
        videos, shots, samples = read_catalog_records(str(tmp_path))
        assert tuple(videos) == snapshot.videos
        assert shots == dict(snapshot.shots)
        assert samples == dict(snapshot.samples)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(CatalogFormatError):
            read_catalog_records(str(tmp_path))

    def test_corrupt_shot_partition_rejected(self, snapshot, tmp_path):
        write_catalog_records(str(tmp_path), snapshot.videos, snapshot.shots, snapshot.samples)
        shots_file = tmp_path / "shots.jsonl"
        lines = shots_file.read_text().splitlines()
        row = json.loads(lines[0])
        row["endFrame"] = row["endFrame"] - 1
        lines[0] = json.dumps(row)
        shots_file.write_text("".join(l + "\n" for l in lines))
        with pytest.raises(CatalogFormatError):
            read_catalog_records(str(tmp_path))

    def test_unknown_video_in_samples_rejected(self, snapshot, tmp_path):
        write_catalog_records(str(tmp_path), snapshot.videos, snapshot.shots, snapshot.samples)
        with open(tmp_path / "samples.jsonl", "a") as fh:
            fh.write('{"videoId":"ghost","tSec":0,"frameIndex":0}\n')
        with pytest.raises(CatalogFormatError):
            read_catalog_records(str(tmp_path))


class TestSnapshotBasics:
    def test_empty_snapshot(self):
        snap = CatalogSnapshot.empty()
        assert snap.is_empty
        assert snap.video_count == 0

    def test_sources_sorted(self, snapshot):
        assert snapshot.sources() == ["netA", "netB"]

    def test_frame_score_lookup_keeps_best(self, snapshot):
        scores = snapshot.frame_score_lookup[("v1", 0)]
        assert scores[("netA", "car")] == 0.9
        assert scores[("netB", "car")] == 0.7
