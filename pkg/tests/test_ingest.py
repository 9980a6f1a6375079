import numpy as np
import pytest

from divex.catalog import VideoRecord
from divex.errors import FrameDirectoryError, PpmFormatError
from divex.ingest import (
    Frame,
    ShotParams,
    detect_shots,
    frame_file_count,
    frames_of_shot,
    ppm_bytes,
    read_frame,
    read_frames,
    read_ppm,
    sample_uniform,
    scale_to_max_edge,
    write_ppm,
)
from divex.synth import fixture_frames_v1, solid, vertical_stripes, write_video


class TestPpm:
    def test_round_trip(self, tmp_path):
        frame = vertical_stripes(6, 4)
        path = str(tmp_path / "f.ppm")
        write_ppm(path, frame)
        back = read_ppm(path)
        assert back.width == 6 and back.height == 4
        assert np.array_equal(back.pixels, frame.pixels)

    def test_bytes_header(self):
        data = ppm_bytes(solid(2, 3, (1, 2, 3)))
        assert data.startswith(b"P6\n2 3\n255\n")
        assert len(data) == len(b"P6\n2 3\n255\n") + 18

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "c.ppm"
        path.write_bytes(b"P6\n# a comment\n1 1\n# another\n255\n\x10\x20\x30")
        frame = read_ppm(str(path))
        assert frame.pixels[0, 0].tolist() == [16, 32, 48]

    def test_p3_rejected(self, tmp_path):
        path = tmp_path / "p3.ppm"
        path.write_bytes(b"P3\n1 1\n255\n16 32 48\n")
        with pytest.raises(PpmFormatError):
            read_ppm(str(path))

    def test_wrong_maxval_rejected(self, tmp_path):
        path = tmp_path / "m.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
        with pytest.raises(PpmFormatError):
            read_ppm(str(path))

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "t.ppm"
        path.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")
        with pytest.raises(PpmFormatError):
            read_ppm(str(path))


class TestFrameDirectory:
    def test_reads_in_order(self, tmp_path):
        frames = [solid(4, 4, (i, 0, 0)) for i in range(3)]
        write_video(tmp_path, frames)
        back = list(read_frames(str(tmp_path)))
        assert [f.pixels[0, 0, 0] for f in back] == [0, 1, 2]
        assert frame_file_count(str(tmp_path)) == 3

    def test_gap_names_missing_index(self, tmp_path):
        write_video(tmp_path, [solid(4, 4, (0, 0, 0))] * 3)
        (tmp_path / "frame_000001.ppm").unlink()
        with pytest.raises(FrameDirectoryError) as err:
            frame_file_count(str(tmp_path))
        assert "1" in str(err.value)

    def test_missing_directory(self):
        with pytest.raises(FrameDirectoryError):
            frame_file_count("/nonexistent/frames")

    def test_read_frame_by_index(self, tmp_path):
        write_video(tmp_path, [solid(4, 4, (9, 9, 9)), solid(4, 4, (7, 7, 7))])
        assert read_frame(str(tmp_path), 1).pixels[0, 0, 0] == 7

    def test_foreign_files_ignored(self, tmp_path):
        write_video(tmp_path, [solid(4, 4, (0, 0, 0))])
        (tmp_path / "notes.txt").write_text("not a frame")
        assert frame_file_count(str(tmp_path)) == 1


class TestShotDetection:
    def test_hard_cut_at_frame_10(self):
        shots = detect_shots("v1", fixture_frames_v1())
        assert [(s.start_frame, s.end_frame) for s in shots] == [(0, 9), (10, 19)]
        assert [s.keyframe for s in shots] == [4, 14]

    def test_no_cut_single_shot(self):
        shots = detect_shots("x", [solid(8, 8, (50, 60, 70))] * 12)
        assert [(s.start_frame, s.end_frame, s.keyframe) for s in shots] == [(0, 11, 5)]

    def test_min_length_suppresses_rapid_cuts(self):
        # alternate colors every frame: every histogram distance is maximal,
        # but boundaries may only land every minShotFrames frames
        frames = [solid(8, 8, (255, 0, 0)) if i % 2 == 0 else solid(8, 8, (0, 0, 255)) for i in range(20)]
        shots = detect_shots("x", frames)
        assert [(s.start_frame, s.end_frame) for s in shots] == [(0, 9), (10, 19)]

    def test_threshold_boundary_is_strict(self):
        # two colors sharing no histogram bin give distance 2.0; a threshold
        # at exactly 2.0 must not fire (cut requires distance > threshold)
        frames = [solid(8, 8, (255, 0, 0))] * 10 + [solid(8, 8, (0, 0, 255))] * 10
        shots = detect_shots("x", frames, ShotParams(cut_threshold=2.0))
        assert len(shots) == 1

    def test_custom_min_shot_frames(self):
        frames = [solid(8, 8, (255, 0, 0))] * 3 + [solid(8, 8, (0, 0, 255))] * 3
        shots = detect_shots("x", frames, ShotParams(min_shot_frames=2))
        assert [(s.start_frame, s.end_frame) for s in shots] == [(0, 2), (3, 5)]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            detect_shots("x", [])

    def test_keyframe_is_floor_midpoint(self):
        shots = detect_shots("x", [solid(8, 8, (1, 2, 3))] * 5)
        assert shots[0].keyframe == 2

    def test_params_validated(self):
        with pytest.raises(ValueError):
            ShotParams(cut_threshold=-0.1)
        with pytest.raises(ValueError):
            ShotParams(min_shot_frames=0)


class TestUniformSampling:
    def video(self, fps, duration):
        return VideoRecord("v", "/x", fps, duration, "2009-01-01T00:00:00Z", "", "")

    def test_whole_seconds_below_duration(self):
        samples = sample_uniform(self.video(10.0, 2.0))
        assert [(s.t_sec, s.frame_index) for s in samples] == [(0, 0), (1, 10)]

    def test_exact_duration_excluded(self):
        # t < durationSec, so duration 3.0 yields t = 0, 1, 2
        samples = sample_uniform(self.video(2.5, 3.0))
        assert [(s.t_sec, s.frame_index) for s in samples] == [(0, 0), (1, 3), (2, 5)]

    def test_fractional_duration_includes_last_whole_second(self):
        samples = sample_uniform(self.video(10.0, 2.5))
        assert [s.t_sec for s in samples] == [0, 1, 2]

    def test_index_clamped_to_last_frame(self):
        # round(2 * 2.6) = 5 but the video only has round(2.6*2.2)=6 frames
        # (indices 0..5); a higher-rate example: fps 3, duration 1.4 -> 4
        # frames, t=1 -> round(3)=3 = last frame exactly
        samples = sample_uniform(self.video(3.0, 1.4))
        assert [(s.t_sec, s.frame_index) for s in samples] == [(0, 0), (1, 3)]

    def test_half_frame_times_round_up(self):
        samples = sample_uniform(self.video(2.5, 2.0))
        assert [(s.t_sec, s.frame_index) for s in samples] == [(0, 0), (1, 3)]


class TestScaling:
    def test_downscale_long_edge(self):
        thumb = scale_to_max_edge(solid(32, 24, (5, 5, 5)), 16)
        assert (thumb.width, thumb.height) == (16, 12)

    def test_never_upscales(self):
        frame = solid(8, 6, (1, 1, 1))
        thumb = scale_to_max_edge(frame, 100)
        assert (thumb.width, thumb.height) == (8, 6)

    def test_portrait_aspect(self):
        thumb = scale_to_max_edge(solid(10, 40, (0, 0, 0)), 20)
        assert (thumb.width, thumb.height) == (5, 20)

    def test_min_dimension_floor_of_one(self):
        thumb = scale_to_max_edge(solid(100, 2, (0, 0, 0)), 10)
        assert thumb.width == 10 and thumb.height == 1

    def test_nearest_neighbor_preserves_palette(self):
        frame = vertical_stripes(16, 16)
        thumb = scale_to_max_edge(frame, 8)
        values = set(np.unique(thumb.pixels).tolist())
        assert values <= {0, 255}


class TestFramesOfShot:
    def test_slices_inclusive_range(self):
        frames = fixture_frames_v1()
        shots = detect_shots("v1", frames)
        sub = frames_of_shot(frames, shots[1])
        assert len(sub) == 10
        assert sub[0].pixels[0, 0].tolist() == [0, 0, 255]


class TestFrameType:
    def test_shape_enforced(self):
        with pytest.raises(ValueError):
            Frame(4, 4, np.zeros((4, 4), dtype=np.uint8))
