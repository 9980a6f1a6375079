"""Catalog data model: videos, shots, frame samples, item keys, snapshots.

The catalog persists as a directory of newline-delimited JSON files
(videos.jsonl, shots.jsonl, samples.jsonl plus the feature/detection stores
written by the pipeline). Queries never touch files: they run against an
immutable :class:`CatalogSnapshot` built once per ingest.
"""
from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    BadItemKeyError,
    CatalogFormatError,
    DuplicateVideoError,
    ManifestError,
    OrdinalOutOfRangeError,
    UnknownVideoError,
)

if TYPE_CHECKING:  # pragma: no cover - import cycle guards, types only
    from .features import ConceptDetection, FeatureStore
    from .search import ConceptIndex


def round_half_up(x: float) -> int:
    """Round half away from zero for non-negative x (2.5 -> 3, not banker's 2)."""
    return int(math.floor(x + 0.5))


def implied_frame_count(fps: float, duration_sec: float) -> int:
    """Number of frames a video of this fps/duration is expected to ship."""
    return round_half_up(fps * duration_sec)


def parse_creation_time(value: str) -> datetime:
    """Parse an ISO 8601 timestamp; naive values are treated as UTC."""
    raw = value.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"bad creationTime {value!r}: {exc}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


class Granularity(str, Enum):
    SHOT = "shot"
    FRAME = "frame"


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    frame_path: str
    fps: float
    duration_sec: float
    creation_time: str
    title: str
    description: str

    def validate(self) -> None:
        if not self.video_id:
            raise ValueError("videoId must be non-empty")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not self.duration_sec > 0:
            raise ValueError(f"durationSec must be positive, got {self.duration_sec}")
        parse_creation_time(self.creation_time)

    @property
    def creation_dt(self) -> datetime:
        return parse_creation_time(self.creation_time)

    @property
    def frame_count(self) -> int:
        return implied_frame_count(self.fps, self.duration_sec)

    def to_json(self) -> dict:
        return {
            "videoId": self.video_id,
            "framePath": self.frame_path,
            "fps": self.fps,
            "durationSec": self.duration_sec,
            "creationTime": self.creation_time,
            "title": self.title,
            "description": self.description,
        }


_VIDEO_FIELDS = ("videoId", "framePath", "fps", "durationSec", "creationTime", "title", "description")


@dataclass(frozen=True)
class ShotRecord:
    video_id: str
    shot_index: int
    start_frame: int
    end_frame: int
    keyframe: int

    def validate(self) -> None:
        if not 0 <= self.start_frame <= self.keyframe <= self.end_frame:
            raise ValueError(
                f"shot {self.video_id}/{self.shot_index}: need startFrame <= keyframe <= endFrame, "
                f"got {self.start_frame}/{self.keyframe}/{self.end_frame}"
            )

    def to_json(self) -> dict:
        return {
            "videoId": self.video_id,
            "shotIndex": self.shot_index,
            "startFrame": self.start_frame,
            "endFrame": self.end_frame,
            "keyframe": self.keyframe,
        }


@dataclass(frozen=True)
class FrameSampleRecord:
    video_id: str
    t_sec: int
    frame_index: int

    def to_json(self) -> dict:
        return {"videoId": self.video_id, "tSec": self.t_sec, "frameIndex": self.frame_index}


# Canonical key syntax: "v:{videoId}/s:{ordinal}" or "v:{videoId}/f:{ordinal}".
# The videoId capture is greedy so ids containing "/" still parse; ordinals
# carry no leading zeros so that format(parse(k)) == k.
_KEY_RE = re.compile(r"^v:(.+)/([sf]):(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class ItemKey:
    """Address of one retrievable unit: a shot or a one-second frame sample."""

    granularity: Granularity
    video_id: str
    ordinal: int

    def canonical(self) -> str:
        tag = "s" if self.granularity is Granularity.SHOT else "f"
        return f"v:{self.video_id}/{tag}:{self.ordinal}"

    @classmethod
    def parse(cls, text: str) -> "ItemKey":
        m = _KEY_RE.match(text)
        if not m:
            raise BadItemKeyError(f"malformed item key {text!r}")
        gran = Granularity.SHOT if m.group(2) == "s" else Granularity.FRAME
        return cls(gran, m.group(1), int(m.group(3)))

    @classmethod
    def shot(cls, video_id: str, shot_index: int) -> "ItemKey":
        return cls(Granularity.SHOT, video_id, shot_index)

    @classmethod
    def frame(cls, video_id: str, t_sec: int) -> "ItemKey":
        return cls(Granularity.FRAME, video_id, t_sec)

    def __str__(self) -> str:
        return self.canonical()


@dataclass(frozen=True)
class ResolvedItem:
    key: ItemKey
    video: VideoRecord
    shot: ShotRecord | None = None
    sample: FrameSampleRecord | None = None


@dataclass(frozen=True)
class CatalogSnapshot:
    """Immutable view of every record plus the feature and index stores.

    Snapshots are safe to share across threads; re-ingestion builds a new one
    and never mutates views already handed out.
    """

    videos: tuple[VideoRecord, ...]
    shots: Mapping[str, tuple[ShotRecord, ...]]
    samples: Mapping[str, tuple[FrameSampleRecord, ...]]
    features: "FeatureStore"
    detections: tuple["ConceptDetection", ...]
    vocabularies: Mapping[str, tuple[str, ...]]
    concept_index: "ConceptIndex"

    @classmethod
    def empty(cls) -> "CatalogSnapshot":
        from .features import FeatureStore
        from .search import ConceptIndex

        return cls(
            videos=(),
            shots={},
            samples={},
            features=FeatureStore({}),
            detections=(),
            vocabularies={},
            concept_index=ConceptIndex({}),
        )

    @property
    def video_count(self) -> int:
        return len(self.videos)

    @property
    def is_empty(self) -> bool:
        return not self.videos

    @cached_property
    def _by_id(self) -> dict[str, VideoRecord]:
        return {v.video_id: v for v in self.videos}

    def video(self, video_id: str) -> VideoRecord:
        try:
            return self._by_id[video_id]
        except KeyError:
            raise UnknownVideoError(video_id) from None

    def sources(self) -> list[str]:
        return sorted(self.vocabularies)

    def resolve(self, key: ItemKey) -> ResolvedItem:
        """Return the record a key addresses, or a distinguished error."""
        video = self.video(key.video_id)
        if key.granularity is Granularity.SHOT:
            shots = self.shots.get(key.video_id, ())
            if not 0 <= key.ordinal < len(shots):
                raise OrdinalOutOfRangeError(key.canonical(), len(shots))
            return ResolvedItem(key, video, shot=shots[key.ordinal])
        samples = self.samples.get(key.video_id, ())
        for sample in samples:
            if sample.t_sec == key.ordinal:
                return ResolvedItem(key, video, sample=sample)
        raise OrdinalOutOfRangeError(key.canonical(), len(samples))

    def shot_for_frame_index(self, video_id: str, frame_index: int) -> ShotRecord | None:
        for shot in self.shots.get(video_id, ()):
            if shot.start_frame <= frame_index <= shot.end_frame:
                return shot
        return None

    @cached_property
    def frame_score_lookup(self) -> dict[tuple[str, int], dict[tuple[str, str], float]]:
        """Best frame-level score per (videoId, tSec) keyed by (source, concept)."""
        table: dict[tuple[str, int], dict[tuple[str, str], float]] = {}
        for det in self.detections:
            if det.item.granularity is not Granularity.FRAME:
                continue
            slot = table.setdefault((det.item.video_id, det.item.ordinal), {})
            pair = (det.source, det.concept_id)
            if det.score > slot.get(pair, -1.0):
                slot[pair] = det.score
        return table


class Catalog:
    """Holder that swaps snapshots atomically under re-ingestion."""

    def __init__(self, snapshot: CatalogSnapshot | None = None):
        self._snapshot = snapshot if snapshot is not None else CatalogSnapshot.empty()

    def snapshot(self) -> CatalogSnapshot:
        return self._snapshot

    def install(self, snapshot: CatalogSnapshot) -> None:
        # attribute assignment is atomic; readers keep whichever snapshot
        # they already hold
        self._snapshot = snapshot


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def load_manifest(path: str) -> list[VideoRecord]:
    """Read manifest.jsonl and validate every record.

    framePath entries are resolved relative to the manifest's directory and
    stored absolute. The implied frame count (round_half_up(fps*durationSec))
    must match the files actually present in each frame directory.
    """
    from .ingest import frame_file_count  # local import: ingest imports us too

    if not os.path.isfile(path):
        raise ManifestError(f"manifest not found: {path}", path=path)
    base = os.path.dirname(os.path.abspath(path))
    records: list[VideoRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {lineno}: not valid JSON ({exc})", line=lineno, path=path)
            if not isinstance(row, dict):
                raise ManifestError(f"line {lineno}: expected a JSON object", line=lineno, path=path)
            missing = [f for f in _VIDEO_FIELDS if f not in row]
            extra = [f for f in row if f not in _VIDEO_FIELDS]
            if missing or extra:
                raise ManifestError(
                    f"line {lineno}: bad fields (missing {missing or 'none'}, unexpected {extra or 'none'})",
                    line=lineno,
                    path=path,
                )
            frame_path = row["framePath"]
            if not os.path.isabs(frame_path):
                frame_path = os.path.normpath(os.path.join(base, frame_path))
            record = VideoRecord(
                video_id=str(row["videoId"]),
                frame_path=frame_path,
                fps=float(row["fps"]),
                duration_sec=float(row["durationSec"]),
                creation_time=str(row["creationTime"]),
                title=str(row["title"]),
                description=str(row["description"]),
            )
            try:
                record.validate()
            except ValueError as exc:
                raise ManifestError(f"line {lineno}: {exc}", line=lineno, path=path)
            if record.video_id in seen:
                raise DuplicateVideoError(
                    f"line {lineno}: duplicate videoId {record.video_id!r}", line=lineno, path=path
                )
            seen.add(record.video_id)
            if not os.path.isdir(record.frame_path):
                raise ManifestError(
                    f"line {lineno}: framePath is not a directory: {record.frame_path}",
                    line=lineno,
                    path=path,
                )
            present = frame_file_count(record.frame_path)
            if present != record.frame_count:
                raise ManifestError(
                    f"line {lineno}: video {record.video_id!r} implies {record.frame_count} frames "
                    f"but {present} files are present",
                    line=lineno,
                    path=path,
                )
            records.append(record)
    return records


def validate_shots(video: VideoRecord, shots: Iterable[ShotRecord]) -> None:
    """Check the partition invariant: shots cover [0, lastFrame] with no gaps."""
    ordered = list(shots)
    expected_start = 0
    for i, shot in enumerate(ordered):
        shot.validate()
        if shot.shot_index != i:
            raise ValueError(f"video {video.video_id}: shotIndex {shot.shot_index} at position {i}")
        if shot.start_frame != expected_start:
            raise ValueError(
                f"video {video.video_id}: shot {i} starts at {shot.start_frame}, expected {expected_start}"
            )
        expected_start = shot.end_frame + 1
    if ordered and expected_start != video.frame_count:
        raise ValueError(
            f"video {video.video_id}: shots end at frame {expected_start - 1}, "
            f"expected {video.frame_count - 1}"
        )


def write_catalog_records(
    out_dir: str,
    videos: Iterable[VideoRecord],
    shots: Mapping[str, Iterable[ShotRecord]],
    samples: Mapping[str, Iterable[FrameSampleRecord]],
) -> None:
    os.makedirs(out_dir, exist_ok=True)
    video_list = list(videos)
    with open(os.path.join(out_dir, "videos.jsonl"), "w", encoding="utf-8") as fh:
        for video in video_list:
            fh.write(_dump(video.to_json()) + "\n")
    with open(os.path.join(out_dir, "shots.jsonl"), "w", encoding="utf-8") as fh:
        for video in video_list:
            for shot in shots.get(video.video_id, ()):
                fh.write(_dump(shot.to_json()) + "\n")
    with open(os.path.join(out_dir, "samples.jsonl"), "w", encoding="utf-8") as fh:
        for video in video_list:
            for sample in samples.get(video.video_id, ()):
                fh.write(_dump(sample.to_json()) + "\n")


def _read_jsonl(path: str) -> list[dict]:
    if not os.path.isfile(path):
        raise CatalogFormatError(f"missing catalog file: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CatalogFormatError(f"{path}:{lineno}: {exc}")
    return rows


def read_catalog_records(
    catalog_dir: str,
) -> tuple[list[VideoRecord], dict[str, tuple[ShotRecord, ...]], dict[str, tuple[FrameSampleRecord, ...]]]:
    """Load and re-validate videos/shots/samples from a catalog directory."""
    videos = []
    for row in _read_jsonl(os.path.join(catalog_dir, "videos.jsonl")):
        video = VideoRecord(
            video_id=row["videoId"],
            frame_path=row["framePath"],
            fps=row["fps"],
            duration_sec=row["durationSec"],
            creation_time=row["creationTime"],
            title=row["title"],
            description=row["description"],
        )
        try:
            video.validate()
        except ValueError as exc:
            raise CatalogFormatError(f"videos.jsonl: {exc}")
        videos.append(video)
    by_id = {v.video_id: v for v in videos}
    if len(by_id) != len(videos):
        raise CatalogFormatError("videos.jsonl: duplicate videoId")

    shots: dict[str, list[ShotRecord]] = {}
    for row in _read_jsonl(os.path.join(catalog_dir, "shots.jsonl")):
        if row["videoId"] not in by_id:
            raise CatalogFormatError(f"shots.jsonl: unknown videoId {row['videoId']!r}")
        shots.setdefault(row["videoId"], []).append(
            ShotRecord(row["videoId"], row["shotIndex"], row["startFrame"], row["endFrame"], row["keyframe"])
        )
    for video_id, recs in shots.items():
        recs.sort(key=lambda s: s.shot_index)
        try:
            validate_shots(by_id[video_id], recs)
        except ValueError as exc:
            raise CatalogFormatError(f"shots.jsonl: {exc}")

    samples: dict[str, list[FrameSampleRecord]] = {}
    for row in _read_jsonl(os.path.join(catalog_dir, "samples.jsonl")):
        if row["videoId"] not in by_id:
            raise CatalogFormatError(f"samples.jsonl: unknown videoId {row['videoId']!r}")
        samples.setdefault(row["videoId"], []).append(
            FrameSampleRecord(row["videoId"], row["tSec"], row["frameIndex"])
        )
    for video_id, srecs in samples.items():
        srecs.sort(key=lambda s: s.t_sec)
        video = by_id[video_id]
        for sample in srecs:
            if not sample.t_sec < video.duration_sec:
                raise CatalogFormatError(
                    f"samples.jsonl: sample t={sample.t_sec} outside video {video_id!r} duration"
                )
            expected = min(round_half_up(sample.t_sec * video.fps), video.frame_count - 1)
            if sample.frame_index != expected:
                raise CatalogFormatError(
                    f"samples.jsonl: sample {video_id}/{sample.t_sec} has frameIndex "
                    f"{sample.frame_index}, expected {expected}"
                )

    return (
        videos,
        {vid: tuple(recs) for vid, recs in shots.items()},
        {vid: tuple(recs) for vid, recs in samples.items()},
    )
