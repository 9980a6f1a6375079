"""Synthetic fixtures: tiny PPM corpora and randomized in-memory catalogs.

The deterministic three-video corpus exercises every retrieval path (hard
cut, animated stripes, static card, two concept sources) and is small
enough to ingest in well under a second. The randomized builders produce
in-memory snapshots for property tests without touching disk.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import (
    CatalogSnapshot,
    FrameSampleRecord,
    ItemKey,
    ShotRecord,
    VideoRecord,
    round_half_up,
)
from .features import (
    COLOR_DIMS,
    MOTION_DIMS,
    TEXTURE_DIMS,
    ConceptDetection,
    FeatureKind,
    FeatureStore,
    FeatureVector,
)
from .ingest import Frame, write_ppm
from .search import build_concept_index

RED = (255, 0, 0)
BLUE = (0, 0, 255)
GREEN = (0, 255, 0)
GRAY = (128, 128, 128)


def solid(width: int, height: int, rgb: tuple[int, int, int]) -> Frame:
    pixels = np.zeros((height, width, 3), dtype=np.uint8)
    pixels[:, :] = rgb
    return Frame(width, height, pixels)


def vertical_stripes(width: int, height: int, period: int = 2, phase: int = 0) -> Frame:
    """Alternating black/white columns; phase shifts the pattern sideways."""
    cols = (np.arange(width) + phase) % period < (period + 1) // 2
    pixels = np.where(cols[None, :, None], 255, 0).astype(np.uint8)
    return Frame(width, height, np.broadcast_to(pixels, (height, width, 3)).copy())


def write_video(frame_dir: str | Path, frames: Sequence[Frame]) -> None:
    frame_dir = Path(frame_dir)
    frame_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        write_ppm(str(frame_dir / f"frame_{i:06d}.ppm"), frame)


@dataclass(frozen=True)
class FixtureCorpus:
    root: str
    manifest_path: str
    score_paths: tuple[str, ...]


def fixture_frames_v1() -> list[Frame]:
    """20 frames at 32x24: ten red, then a hard cut to ten blue."""
    return [solid(32, 24, RED) for _ in range(10)] + [solid(32, 24, BLUE) for _ in range(10)]


def fixture_frames_v2() -> list[Frame]:
    """30 frames at 32x24: fifteen sliding stripe frames, then solid green."""
    return [vertical_stripes(32, 24, period=2, phase=t) for t in range(15)] + [
        solid(32, 24, GREEN) for _ in range(15)
    ]


def fixture_frames_v3() -> list[Frame]:
    """8 static gray frames at 16x16."""
    return [solid(16, 16, GRAY) for _ in range(8)]


def write_fixture_corpus(root: str | Path) -> FixtureCorpus:
    """Materialize the three-video corpus under root and return its paths."""
    root = Path(root)
    for video_id, frames in (
        ("v1", fixture_frames_v1()),
        ("v2", fixture_frames_v2()),
        ("v3", fixture_frames_v3()),
    ):
        write_video(root / "frames" / video_id, frames)

    manifest_rows = [
        '{"videoId":"v1","framePath":"frames/v1","fps":10.0,"durationSec":2.0,'
        '"creationTime":"2009-06-15T12:00:00Z","title":"Signal lamp test",'
        '"description":"Red card then blue card"}',
        '{"videoId":"v2","framePath":"frames/v2","fps":10.0,"durationSec":3.0,'
        '"creationTime":"2012-03-01T08:30:00Z","title":"Stripes at the beach",'
        '"description":"Sliding fence shadow, then lawn"}',
        '{"videoId":"v3","framePath":"frames/v3","fps":2.5,"durationSec":3.0,'
        '"creationTime":"2007-11-20T18:45:00Z","title":"Slate",'
        '"description":"Static gray card"}',
    ]
    manifest_path = root / "manifest.jsonl"
    manifest_path.write_text("".join(r + "\n" for r in manifest_rows), encoding="utf-8")

    scores_dir = root / "scores"
    scores_dir.mkdir(parents=True, exist_ok=True)
    net_a = [
        "videoId,tSec,source,conceptId,score",
        "v1,0,netA,car,0.9",
        "v1,1,netA,car,0.4",
        "v2,0,netA,person,0.8",
        "v2,1,netA,person,0.35",
        "v2,0,netA,apple,0.6",
        "v3,0,netA,car,0.45",
        "v3,1,netA,beach,0.7",
    ]
    net_b = [
        "videoId,tSec,source,conceptId,score",
        "v1,0,netB,car,0.7",
        "v2,1,netB,apple,0.5",
        "v2,2,netB,beach,0.8",
        "v3,2,netB,indoor,0.55",
    ]
    path_a = scores_dir / "netA.csv"
    path_b = scores_dir / "netB.csv"
    path_a.write_text("".join(r + "\n" for r in net_a), encoding="utf-8")
    path_b.write_text("".join(r + "\n" for r in net_b), encoding="utf-8")
    return FixtureCorpus(str(root), str(manifest_path), (str(path_a), str(path_b)))


_KIND_DIMS = {
    FeatureKind.COLOR: COLOR_DIMS,
    FeatureKind.TEXTURE: TEXTURE_DIMS,
    FeatureKind.MOTION: MOTION_DIMS,
}


def random_catalog(
    rng: np.random.Generator,
    n_videos: int = 10,
    max_shots: int = 5,
    concept_dims: int = 8,
    sources: Sequence[str] = ("netA", "netB"),
    concepts: Sequence[str] = ("car", "person", "apple", "beach", "tree", "boat"),
    detection_rate: float = 0.5,
    year_range: tuple[int, int] = (2005, 2015),
) -> CatalogSnapshot:
    """Random in-memory snapshot with plausible structure and random vectors.

    Videos get whole-second durations, contiguous shots over their frames,
    random feature vectors of every kind, and Bernoulli-sampled frame
    detections. No frame files exist; framePath is a placeholder, so only
    operations that never touch pixels may run against this snapshot.
    """
    videos = []
    shots: dict[str, tuple[ShotRecord, ...]] = {}
    samples: dict[str, tuple[FrameSampleRecord, ...]] = {}
    vectors: dict[tuple[str, FeatureKind], FeatureVector] = {}
    detections: list[ConceptDetection] = []
    layout = sorted((src, cid) for src in sources for cid in concepts)

    for v in range(n_videos):
        video_id = f"rv{v:03d}"
        fps = float(rng.integers(2, 31))
        duration = float(rng.integers(2, 12))
        n_frames = round_half_up(fps * duration)
        year = int(rng.integers(year_range[0], year_range[1] + 1))
        month = int(rng.integers(1, 13))
        videos.append(
            VideoRecord(
                video_id=video_id,
                frame_path=f"/nonexistent/{video_id}",
                fps=fps,
                duration_sec=duration,
                creation_time=f"{year:04d}-{month:02d}-01T00:00:00Z",
                title=f"Random video {v}",
                description="",
            )
        )

        n_shots = int(rng.integers(1, max_shots + 1))
        cuts = sorted(rng.choice(np.arange(1, n_frames), size=min(n_shots - 1, n_frames - 1), replace=False).tolist())
        bounds = [0] + cuts + [n_frames]
        video_shots = []
        for s in range(len(bounds) - 1):
            start, end = bounds[s], bounds[s + 1] - 1
            video_shots.append(ShotRecord(video_id, s, start, end, (start + end) // 2))
        shots[video_id] = tuple(video_shots)

        last = n_frames - 1
        video_samples = tuple(
            FrameSampleRecord(video_id, t, min(round_half_up(t * fps), last)) for t in range(int(duration))
        )
        samples[video_id] = video_samples

        for shot in video_shots:
            key = ItemKey.shot(video_id, shot.shot_index).canonical()
            for kind, dims in _KIND_DIMS.items():
                vectors[(key, kind)] = FeatureVector(kind, rng.random(dims))
            vectors[(key, FeatureKind.CONCEPT)] = FeatureVector(FeatureKind.CONCEPT, rng.random(len(layout)))
        for sample in video_samples:
            key = ItemKey.frame(video_id, sample.t_sec).canonical()
            for kind in (FeatureKind.COLOR, FeatureKind.TEXTURE):
                vectors[(key, kind)] = FeatureVector(kind, rng.random(_KIND_DIMS[kind]))
            vectors[(key, FeatureKind.CONCEPT)] = FeatureVector(FeatureKind.CONCEPT, rng.random(len(layout)))
            for source in sources:
                for concept in concepts:
                    if rng.random() < detection_rate:
                        detections.append(
                            ConceptDetection(
                                ItemKey.frame(video_id, sample.t_sec),
                                source,
                                concept,
                                float(rng.integers(0, 101)) / 100.0,
                            )
                        )

    base = replace(
        CatalogSnapshot.empty(), videos=tuple(videos), shots=shots, samples=samples
    )
    from .features import aggregate_shot_concepts, vocabularies_from

    shot_dets, _ = aggregate_shot_concepts(detections, base)
    all_dets = tuple(sorted(detections + shot_dets, key=lambda d: (d.item.canonical(), d.source, d.concept_id)))
    return replace(
        base,
        features=FeatureStore(vectors),
        detections=all_dets,
        vocabularies=vocabularies_from(all_dets),
        concept_index=build_concept_index(all_dets),
    )
