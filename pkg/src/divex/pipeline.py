"""Offline ingestion pipeline: manifest in, catalog directory out.

Reads frame directories, detects shots, samples frames, computes visual
descriptors, folds in concept score files, and builds the in-memory
snapshot. The same snapshot round-trips through a catalog directory of
newline-delimited JSON files, byte-identically for identical inputs.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Sequence

from .catalog import (
    CatalogSnapshot,
    FrameSampleRecord,
    ItemKey,
    ShotRecord,
    load_manifest,
    read_catalog_records,
    validate_shots,
    write_catalog_records,
)
from .errors import FrameDirectoryError
from .explore import build_featuremap, read_featuremaps, write_featuremaps
from .features import (
    ConceptDetection,
    FeatureKind,
    FeatureStore,
    FeatureVector,
    aggregate_shot_concepts,
    color_histogram,
    frame_concept_vectors,
    load_concept_scores,
    motion_descriptor,
    read_detections,
    read_feature_store,
    texture_descriptor,
    vocabularies_from,
    write_detections,
    write_feature_store,
)
from .ingest import ShotParams, detect_shots, frames_of_shot, read_frames, sample_uniform
from .search import build_concept_index
from .som import GridLayout

CATALOG_FILES = ("videos.jsonl", "shots.jsonl", "samples.jsonl", "features.jsonl", "concepts.jsonl")
FEATUREMAP_FILE = "featuremaps.jsonl"


@dataclass(frozen=True)
class IngestSummary:
    videos: int
    shots: int
    samples: int
    vectors: int
    detections: int
    sources: tuple[str, ...]
    featuremaps: int
    out_dir: str

    def lines(self) -> list[str]:
        return [
            f"{self.videos} videos",
            f"{self.shots} shots",
            f"{self.samples} frame samples",
            f"{self.vectors} feature vectors",
            f"{self.detections} concept detections from {len(self.sources)} sources",
            f"{self.featuremaps} precomputed featuremaps",
            f"catalog written to {self.out_dir}",
        ]


def _dedupe_best(detections: Sequence[ConceptDetection]) -> list[ConceptDetection]:
    best: dict[tuple[str, str, str], ConceptDetection] = {}
    for det in detections:
        key = (det.item.canonical(), det.source, det.concept_id)
        kept = best.get(key)
        if kept is None or det.score > kept.score:
            best[key] = det
    return [best[key] for key in sorted(best)]


def build_snapshot(
    manifest_path: str,
    score_paths: Sequence[str] = (),
    shot_params: ShotParams = ShotParams(),
) -> CatalogSnapshot:
    """Run the full offline chain and return the immutable snapshot."""
    videos = load_manifest(manifest_path)
    shots: dict[str, tuple[ShotRecord, ...]] = {}
    samples: dict[str, tuple[FrameSampleRecord, ...]] = {}
    vectors: dict[tuple[str, FeatureKind], FeatureVector] = {}

    for video in videos:
        frames = list(read_frames(video.frame_path))
        if len(frames) != video.frame_count:
            raise FrameDirectoryError(
                f"video {video.video_id!r}: manifest implies {video.frame_count} frames, directory has {len(frames)}"
            )
        video_shots = detect_shots(video.video_id, frames, shot_params)
        validate_shots(video, video_shots)
        video_samples = sample_uniform(video)
        shots[video.video_id] = tuple(video_shots)
        samples[video.video_id] = tuple(video_samples)

        for shot in video_shots:
            key = ItemKey.shot(video.video_id, shot.shot_index).canonical()
            keyframe = frames[shot.keyframe]
            vectors[(key, FeatureKind.COLOR)] = color_histogram(keyframe)
            vectors[(key, FeatureKind.TEXTURE)] = texture_descriptor(keyframe)
            vectors[(key, FeatureKind.MOTION)] = motion_descriptor(frames_of_shot(frames, shot))
        for sample in video_samples:
            key = ItemKey.frame(video.video_id, sample.t_sec).canonical()
            frame = frames[sample.frame_index]
            vectors[(key, FeatureKind.COLOR)] = color_histogram(frame)
            vectors[(key, FeatureKind.TEXTURE)] = texture_descriptor(frame)

    # partial snapshot: enough structure for score-file validation and
    # frame-to-shot mapping, no features or index yet
    base = replace(CatalogSnapshot.empty(), videos=tuple(videos), shots=shots, samples=samples)

    frame_detections: list[ConceptDetection] = []
    for path in score_paths:
        frame_detections.extend(load_concept_scores(path, base))
    frame_detections = _dedupe_best(frame_detections)

    shot_detections, shot_concepts = aggregate_shot_concepts(frame_detections, base)
    for key, vec in shot_concepts.items():
        vectors[(key, FeatureKind.CONCEPT)] = vec
    for key, vec in frame_concept_vectors(frame_detections, base).items():
        vectors[(key, FeatureKind.CONCEPT)] = vec

    detections = tuple(_dedupe_best(frame_detections + shot_detections))
    return CatalogSnapshot(
        videos=tuple(videos),
        shots=shots,
        samples=samples,
        features=FeatureStore(vectors),
        detections=detections,
        vocabularies=vocabularies_from(detections),
        concept_index=build_concept_index(detections),
    )


def precompute_featuremaps(snapshot: CatalogSnapshot, seed: int = 0) -> list[tuple[str, str, GridLayout]]:
    """Default (som-organized) map for every (source, concept) pair."""
    maps = []
    for source in snapshot.concept_index.sources():
        for concept in snapshot.vocabularies.get(source, ()):
            fmap = build_featuremap(snapshot, concept, source, seed=seed)
            maps.append((concept, source, fmap.layout))
    return maps


def write_catalog(out_dir: str, snapshot: CatalogSnapshot, featuremaps: Sequence[tuple[str, str, GridLayout]] | None = None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_catalog_records(out_dir, snapshot.videos, snapshot.shots, snapshot.samples)
    write_feature_store(os.path.join(out_dir, "features.jsonl"), snapshot.features)
    write_detections(os.path.join(out_dir, "concepts.jsonl"), snapshot.detections)
    if featuremaps is not None:
        write_featuremaps(os.path.join(out_dir, FEATUREMAP_FILE), featuremaps)


def load_catalog(catalog_dir: str) -> CatalogSnapshot:
    """Rebuild a snapshot from a catalog directory, re-validating everything."""
    videos, shots, samples = read_catalog_records(catalog_dir)
    features = read_feature_store(os.path.join(catalog_dir, "features.jsonl"))
    detections = tuple(read_detections(os.path.join(catalog_dir, "concepts.jsonl")))
    return CatalogSnapshot(
        videos=tuple(videos),
        shots=shots,
        samples=samples,
        features=features,
        detections=detections,
        vocabularies=vocabularies_from(detections),
        concept_index=build_concept_index(detections),
    )


def load_precomputed_featuremaps(catalog_dir: str) -> list[tuple[str, str, GridLayout]]:
    path = os.path.join(catalog_dir, FEATUREMAP_FILE)
    if not os.path.isfile(path):
        return []
    return read_featuremaps(path)


def ingest(
    manifest_path: str,
    score_paths: Sequence[str],
    out_dir: str,
    seed: int = 0,
    precompute_maps: bool = False,
    shot_params: ShotParams = ShotParams(),
) -> IngestSummary:
    snapshot = build_snapshot(manifest_path, score_paths, shot_params)
    maps = precompute_featuremaps(snapshot, seed) if precompute_maps else None
    write_catalog(out_dir, snapshot, maps)
    return IngestSummary(
        videos=snapshot.video_count,
        shots=sum(len(s) for s in snapshot.shots.values()),
        samples=sum(len(s) for s in snapshot.samples.values()),
        vectors=len(snapshot.features),
        detections=len(snapshot.detections),
        sources=tuple(snapshot.sources()),
        featuremaps=len(maps) if maps else 0,
        out_dir=os.path.abspath(out_dir),
    )
