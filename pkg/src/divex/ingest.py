"""Offline preprocessing: frame decoding, shot boundary detection, sampling.

Videos arrive as directories of binary PPM frames (frame_000000.ppm, ...).
Shot boundaries come from L1 differencing of consecutive HSV color
histograms with a fixed cut threshold and a minimum shot length; uniform
samples are taken at every whole second below the video duration.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .catalog import FrameSampleRecord, ShotRecord, VideoRecord, round_half_up
from .errors import FrameDirectoryError, PpmFormatError

_FRAME_RE = re.compile(r"^frame_(\d{6})\.ppm$")


@dataclass(frozen=True)
class Frame:
    """One decoded frame: row-major RGB, 8 bits per channel."""

    width: int
    height: int
    pixels: np.ndarray  # shape (height, width, 3), dtype uint8

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} does not match {self.height}x{self.width}x3"
            )


@dataclass(frozen=True)
class ShotParams:
    """Cut threshold is an L1 distance between unit-mass histograms, so <= 2."""

    cut_threshold: float = 0.5
    min_shot_frames: int = 10

    def __post_init__(self):
        if not 0 < self.cut_threshold <= 2:
            raise ValueError(f"cutThreshold must be in (0, 2], got {self.cut_threshold}")
        if self.min_shot_frames < 1:
            raise ValueError(f"minShotFrames must be positive, got {self.min_shot_frames}")


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # PPM header tokens are separated by whitespace; '#' starts a comment
    # that runs to end of line.
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    return buf[start:pos], pos


def read_ppm(path: str) -> Frame:
    """Decode a binary (P6, maxval 255) PPM file."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic != b"P6":
        raise PpmFormatError(f"{path}: unsupported PPM format {magic!r} (only binary P6)")
    fields = []
    for _ in range(3):
        token, pos = _read_token(buf, pos)
        if not token.isdigit():
            raise PpmFormatError(f"{path}: malformed header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise PpmFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise PpmFormatError(f"{path}: maxval must be 255, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    data = buf[pos : pos + expected]
    if len(data) != expected:
        raise PpmFormatError(f"{path}: expected {expected} pixel bytes, got {len(data)}")
    pixels = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return Frame(width, height, pixels)


def ppm_bytes(frame: Frame) -> bytes:
    return b"P6\n%d %d\n255\n" % (frame.width, frame.height) + np.ascontiguousarray(frame.pixels).tobytes()


def write_ppm(path: str, frame: Frame) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(frame))


def _frame_files(frame_dir: str) -> list[str]:
    """Frame filenames in index order, after checking numbering is gapless."""
    if not os.path.isdir(frame_dir):
        raise FrameDirectoryError(f"frame directory not found: {frame_dir}")
    indexed = {}
    for name in os.listdir(frame_dir):
        m = _FRAME_RE.match(name)
        if m:
            indexed[int(m.group(1))] = name
    for expect in range(len(indexed)):
        if expect not in indexed:
            raise FrameDirectoryError(f"{frame_dir}: missing frame index {expect} (gap in numbering)")
    return [indexed[i] for i in range(len(indexed))]


def frame_file_count(frame_dir: str) -> int:
    return len(_frame_files(frame_dir))


def read_frames(frame_dir: str) -> Iterator[Frame]:
    """Yield every frame of a directory in index order."""
    for name in _frame_files(frame_dir):
        yield read_ppm(os.path.join(frame_dir, name))


def read_frame(frame_dir: str, index: int) -> Frame:
    """Random access to a single frame by index."""
    path = os.path.join(frame_dir, f"frame_{index:06d}.ppm")
    if not os.path.isfile(path):
        raise FrameDirectoryError(f"{frame_dir}: no frame with index {index}")
    return read_ppm(path)


def detect_shots(video_id: str, frames: Iterable[Frame], params: ShotParams = ShotParams()) -> list[ShotRecord]:
    """Split a frame sequence into shots.

    A cut opens a new shot at frame t when the L1 distance between the HSV
    color histograms of frames t-1 and t exceeds the threshold AND the shot
    being built is already minShotFrames long. Keyframe = shot midpoint.
    """
    from .features import color_histogram

    boundaries = [0]
    prev_hist = None
    count = 0
    for t, frame in enumerate(frames):
        hist = color_histogram(frame).values
        if prev_hist is not None:
            d = float(np.abs(hist - prev_hist).sum())
            if d > params.cut_threshold and t - boundaries[-1] >= params.min_shot_frames:
                boundaries.append(t)
        prev_hist = hist
        count = t + 1
    if count == 0:
        raise ValueError("cannot detect shots in an empty frame sequence")
    boundaries.append(count)
    shots = []
    for i in range(len(boundaries) - 1):
        start, end = boundaries[i], boundaries[i + 1] - 1
        shots.append(ShotRecord(video_id, i, start, end, keyframe=(start + end) // 2))
    return shots


def sample_uniform(video: VideoRecord) -> list[FrameSampleRecord]:
    """One sample per whole second, for every tSec < durationSec."""
    video.validate()
    last = video.frame_count - 1
    samples = []
    t = 0
    while t < video.duration_sec:
        samples.append(FrameSampleRecord(video.video_id, t, min(round_half_up(t * video.fps), last)))
        t += 1
    return samples


def scale_to_max_edge(frame: Frame, max_edge: int) -> Frame:
    """Nearest-neighbor downscale so the longest edge is <= max_edge (never upscales)."""
    longest = max(frame.width, frame.height)
    if longest <= max_edge:
        return frame
    scale = max_edge / longest
    new_w = max(1, round_half_up(frame.width * scale))
    new_h = max(1, round_half_up(frame.height * scale))
    xs = np.minimum((np.arange(new_w) * frame.width) // new_w, frame.width - 1)
    ys = np.minimum((np.arange(new_h) * frame.height) // new_h, frame.height - 1)
    return Frame(new_w, new_h, frame.pixels[np.ix_(ys, xs)])


def frames_of_shot(frames: Sequence[Frame], shot: ShotRecord) -> list[Frame]:
    return list(frames[shot.start_frame : shot.end_frame + 1])
