"""Frame descriptors and concept score handling.

Hand-crafted measures: a 128-bin HSV color histogram, an MPEG-7 style
5-category edge histogram on a 4x4 grid, and a 4x4-block temporal luma
difference for motion. Deep-concept scores are never inferred here; they are
ingested from CSV files produced by external detectors ("sources").
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import CatalogSnapshot, Granularity, ItemKey
from .errors import CatalogFormatError, ScoreFileError

COLOR_DIMS = 128
TEXTURE_DIMS = 80
MOTION_DIMS = 16

# Edge group responses below this are treated as flat (no vote).
EDGE_ACTIVITY_THRESHOLD = 11.0 / 255.0


class FeatureKind(str, Enum):
    CONCEPT = "concept"
    COLOR = "color"
    TEXTURE = "texture"
    MOTION = "motion"


@dataclass(frozen=True)
class FeatureVector:
    kind: FeatureKind
    values: np.ndarray  # 1-D float64, read-only

    @property
    def dims(self) -> int:
        return int(self.values.shape[0])

    def validate(self) -> None:
        v = self.values
        if v.ndim != 1 or v.shape[0] == 0:
            raise ValueError("feature values must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature values must be finite")
        if np.any(v < 0):
            raise ValueError(f"{self.kind.value} values must be non-negative")
        if self.kind is FeatureKind.COLOR:
            if v.shape[0] != COLOR_DIMS:
                raise ValueError(f"color vector must have {COLOR_DIMS} dims, got {v.shape[0]}")
            if abs(v.sum() - 1.0) > 1e-6:
                raise ValueError("color histogram must be L1-normalized")
        elif self.kind is FeatureKind.TEXTURE:
            if v.shape[0] != TEXTURE_DIMS:
                raise ValueError(f"texture vector must have {TEXTURE_DIMS} dims, got {v.shape[0]}")
            for block in v.reshape(16, 5):
                s = block.sum()
                if s > 0 and abs(s - 1.0) > 1e-6:
                    raise ValueError("texture blocks must be L1-normalized or all-zero")
        elif self.kind is FeatureKind.MOTION:
            if v.shape[0] != MOTION_DIMS:
                raise ValueError(f"motion vector must have {MOTION_DIMS} dims, got {v.shape[0]}")
        elif np.any(v > 1.0):
            raise ValueError("concept scores must lie in [0, 1]")


def _vector(kind: FeatureKind, values: np.ndarray) -> FeatureVector:
    arr = np.asarray(values, dtype=np.float64)
    arr.setflags(write=False)
    return FeatureVector(kind, arr)


@dataclass(frozen=True)
class ConceptDetection:
    """One (concept, source, item, score) atom of concept search."""

    item: ItemKey
    source: str
    concept_id: str
    score: float


def rgb_to_hsv(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB(uint8) -> (h degrees [0,360), s [0,1], v [0,1])."""
    rgb = pixels.reshape(-1, 3).astype(np.float64) / 255.0
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    mx = rgb.max(axis=1)
    mn = rgb.min(axis=1)
    delta = mx - mn
    safe = np.where(delta > 0, delta, 1.0)
    # channel priority r, g, b on ties (the formulas agree at ties anyway)
    h = np.select(
        [mx == r, mx == g],
        [((g - b) / safe) % 6.0, (b - r) / safe + 2.0],
        default=(r - g) / safe + 4.0,
    )
    h = np.where(delta > 0, h * 60.0, 0.0)
    s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    return h, s, mx


def color_histogram(frame) -> FeatureVector:
    """128-bin HSV histogram (8H x 4S x 4V), L1-normalized."""
    h, s, v = rgb_to_hsv(frame.pixels)
    h_idx = np.minimum(np.floor(h / 45.0).astype(np.int64), 7)
    s_idx = np.minimum(np.floor(s * 4.0).astype(np.int64), 3)
    v_idx = np.minimum(np.floor(v * 4.0).astype(np.int64), 3)
    bins = h_idx * 16 + s_idx * 4 + v_idx
    hist = np.bincount(bins, minlength=COLOR_DIMS).astype(np.float64)
    return _vector(FeatureKind.COLOR, hist / hist.sum())


def _luma(frame) -> np.ndarray:
    p = frame.pixels.astype(np.float64)
    return 0.299 * p[:, :, 0] + 0.587 * p[:, :, 1] + 0.114 * p[:, :, 2]


def _grid_bounds(size: int, parts: int = 4) -> list[tuple[int, int]]:
    return [(i * size // parts, (i + 1) * size // parts) for i in range(parts)]


def texture_descriptor(frame) -> FeatureVector:
    """5-category edge histogram per 4x4 grid cell, 80 dims.

    Categories (in vector order): horizontal change, vertical change, 45deg,
    135deg, non-directional. Each non-overlapping 2x2 pixel group votes for
    its strongest filter response when that response clears the activity
    threshold; per-cell votes are L1-normalized (all-zero when flat).
    """
    if frame.width < 8 or frame.height < 8:
        raise ValueError(f"frame too small for texture descriptor: {frame.width}x{frame.height} (need >= 8x8)")
    luma = _luma(frame) / 255.0
    blocks = []
    for r0, r1 in _grid_bounds(frame.height):
        for c0, c1 in _grid_bounds(frame.width):
            cell = luma[r0:r1, c0:c1]
            gh = (cell.shape[0] // 2) * 2
            gw = (cell.shape[1] // 2) * 2
            sub = cell[:gh, :gw]
            a = sub[0::2, 0::2]
            b = sub[0::2, 1::2]
            c = sub[1::2, 0::2]
            d = sub[1::2, 1::2]
            responses = np.stack(
                [
                    np.abs(a - b + c - d),                  # horizontal change
                    np.abs(a + b - c - d),                  # vertical change
                    np.sqrt(2.0) * np.abs(a - d),           # 45 degrees
                    np.sqrt(2.0) * np.abs(b - c),           # 135 degrees
                    np.abs(2 * a - 2 * b - 2 * c + 2 * d),  # non-directional
                ]
            ).reshape(5, -1)
            winner = responses.argmax(axis=0)
            active = responses.max(axis=0) >= EDGE_ACTIVITY_THRESHOLD
            votes = np.bincount(winner[active], minlength=5).astype(np.float64)
            total = votes.sum()
            blocks.append(votes / total if total > 0 else votes)
    return _vector(FeatureKind.TEXTURE, np.concatenate(blocks))


def motion_descriptor(frames: Sequence) -> FeatureVector:
    """Mean absolute temporal luma difference per 4x4 block, scaled to [0,1]."""
    frames = list(frames)
    if not frames:
        raise ValueError("motion descriptor needs at least one frame")
    w, h = frames[0].width, frames[0].height
    for f in frames[1:]:
        if (f.width, f.height) != (w, h):
            raise ValueError(f"mismatched frame dimensions: {f.width}x{f.height} vs {w}x{h}")
    acc = np.zeros(MOTION_DIMS, dtype=np.float64)
    if len(frames) < 2:
        return _vector(FeatureKind.MOTION, acc)
    row_bounds = _grid_bounds(h)
    col_bounds = _grid_bounds(w)
    prev = _luma(frames[0])
    for f in frames[1:]:
        cur = _luma(f)
        diff = np.abs(cur - prev)
        block = 0
        for r0, r1 in row_bounds:
            for c0, c1 in col_bounds:
                acc[block] += diff[r0:r1, c0:c1].mean()
                block += 1
        prev = cur
    acc /= (len(frames) - 1) * 255.0
    return _vector(FeatureKind.MOTION, acc)


SCORE_HEADER = ["videoId", "tSec", "source", "conceptId", "score"]


def load_concept_scores(path: str, snapshot: CatalogSnapshot) -> list[ConceptDetection]:
    """Read a concept score CSV and resolve rows against the snapshot.

    Rows address frame samples by (videoId, tSec); conceptIds are normalized
    to lower case. Validation errors name the offending row.
    """
    if not os.path.isfile(path):
        raise ScoreFileError(f"score file not found: {path}", path=path)
    valid_t = {
        (video.video_id, s.t_sec) for video in snapshot.videos for s in snapshot.samples.get(video.video_id, ())
    }
    known = {v.video_id for v in snapshot.videos}
    detections = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_HEADER:
            raise ScoreFileError(f"{path}: header must be {','.join(SCORE_HEADER)!r}", row=1, path=path)
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ScoreFileError(f"{path}: row {rowno}: expected 5 columns, got {len(row)}", row=rowno, path=path)
            video_id, t_raw, source, concept_raw, score_raw = (col.strip() for col in row)
            if video_id not in known:
                raise ScoreFileError(f"{path}: row {rowno}: unknown videoId {video_id!r}", row=rowno, path=path)
            try:
                t_sec = int(t_raw)
            except ValueError:
                raise ScoreFileError(f"{path}: row {rowno}: tSec must be an integer, got {t_raw!r}", row=rowno, path=path)
            if (video_id, t_sec) not in valid_t:
                raise ScoreFileError(
                    f"{path}: row {rowno}: tSec {t_sec} is not a sample time of video {video_id!r}",
                    row=rowno,
                    path=path,
                )
            if not source:
                raise ScoreFileError(f"{path}: row {rowno}: empty source", row=rowno, path=path)
            concept_id = concept_raw.lower()
            if not concept_id:
                raise ScoreFileError(f"{path}: row {rowno}: empty conceptId", row=rowno, path=path)
            try:
                score = float(score_raw)
            except ValueError:
                raise ScoreFileError(f"{path}: row {rowno}: bad score {score_raw!r}", row=rowno, path=path)
            if not 0.0 <= score <= 1.0:
                raise ScoreFileError(
                    f"{path}: row {rowno}: score {score} outside [0, 1]", row=rowno, path=path
                )
            detections.append(ConceptDetection(ItemKey.frame(video_id, t_sec), source, concept_id, score))
    return detections


def vocabularies_from(detections: Iterable[ConceptDetection]) -> dict[str, tuple[str, ...]]:
    """Vocabulary per source = set of conceptIds observed in its detections."""
    vocab: dict[str, set[str]] = {}
    for det in detections:
        vocab.setdefault(det.source, set()).add(det.concept_id)
    return {source: tuple(sorted(ids)) for source, ids in vocab.items()}


def concept_layout(vocabularies: Mapping[str, Iterable[str]]) -> tuple[tuple[str, str], ...]:
    """Dimension order of concept vectors: (source, conceptId) pairs, sorted."""
    return tuple(sorted((src, cid) for src, ids in vocabularies.items() for cid in ids))


def concept_vector(scores: Mapping[tuple[str, str], float], layout: Sequence[tuple[str, str]]) -> FeatureVector:
    values = np.array([scores.get(pair, 0.0) for pair in layout], dtype=np.float64)
    return _vector(FeatureKind.CONCEPT, values)


def aggregate_shot_concepts(
    detections: Iterable[ConceptDetection], snapshot: CatalogSnapshot
) -> tuple[list[ConceptDetection], dict[str, FeatureVector]]:
    """Max-pool frame detections onto the shots that contain the sampled frames.

    Returns the shot-level detections plus one concept vector per shot over
    the combined vocabulary (absent concepts are 0; shots without any
    detection get an all-zero vector).
    """
    detections = list(detections)
    best: dict[str, dict[tuple[str, str], float]] = {}
    for det in detections:
        if det.item.granularity is not Granularity.FRAME:
            raise ValueError("aggregate_shot_concepts expects frame-granularity detections")
        sample = snapshot.resolve(det.item).sample
        shot = snapshot.shot_for_frame_index(det.item.video_id, sample.frame_index)
        if shot is None:
            continue
        key = ItemKey.shot(shot.video_id, shot.shot_index).canonical()
        slot = best.setdefault(key, {})
        pair = (det.source, det.concept_id)
        if det.score > slot.get(pair, -1.0):
            slot[pair] = det.score
    shot_detections = [
        ConceptDetection(ItemKey.parse(key), source, concept, score)
        for key, scores in best.items()
        for (source, concept), score in scores.items()
    ]
    shot_detections.sort(key=lambda d: (d.item.canonical(), d.source, d.concept_id))

    layout = concept_layout(vocabularies_from(detections))
    vectors = {}
    for video in snapshot.videos:
        for shot in snapshot.shots.get(video.video_id, ()):
            key = ItemKey.shot(video.video_id, shot.shot_index).canonical()
            vectors[key] = concept_vector(best.get(key, {}), layout)
    return shot_detections, vectors


def frame_concept_vectors(
    detections: Iterable[ConceptDetection], snapshot: CatalogSnapshot
) -> dict[str, FeatureVector]:
    """Concept vector per frame sample, over the combined vocabulary."""
    detections = list(detections)
    best: dict[str, dict[tuple[str, str], float]] = {}
    for det in detections:
        slot = best.setdefault(det.item.canonical(), {})
        pair = (det.source, det.concept_id)
        if det.score > slot.get(pair, -1.0):
            slot[pair] = det.score
    layout = concept_layout(vocabularies_from(detections))
    vectors = {}
    for video in snapshot.videos:
        for sample in snapshot.samples.get(video.video_id, ()):
            key = ItemKey.frame(video.video_id, sample.t_sec).canonical()
            vectors[key] = concept_vector(best.get(key, {}), layout)
    return vectors


class FeatureStore:
    """Read-only vector store with per-(granularity, kind) matrix views."""

    def __init__(self, vectors: Mapping[tuple[str, FeatureKind], FeatureVector]):
        self._vectors = dict(vectors)
        self._matrices: dict[tuple[Granularity, FeatureKind], tuple[list[ItemKey], np.ndarray]] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def vector(self, item: ItemKey | str, kind: FeatureKind) -> FeatureVector | None:
        key = item.canonical() if isinstance(item, ItemKey) else item
        return self._vectors.get((key, kind))

    def matrix(self, granularity: Granularity, kind: FeatureKind) -> tuple[list[ItemKey], np.ndarray]:
        """All vectors of one kind at one granularity, rows sorted by canonical key."""
        cached = self._matrices.get((granularity, kind))
        if cached is not None:
            return cached
        keys = sorted(
            key
            for (key, k) in self._vectors
            if k is kind and ItemKey.parse(key).granularity is granularity
        )
        items = [ItemKey.parse(k) for k in keys]
        if keys:
            mat = np.stack([self._vectors[(k, kind)].values for k in keys])
        else:
            mat = np.zeros((0, 0), dtype=np.float64)
        mat.setflags(write=False)
        self._matrices[(granularity, kind)] = (items, mat)
        return items, mat

    def all_items(self) -> list[tuple[str, FeatureKind]]:
        return sorted(self._vectors, key=lambda kv: (kv[0], kv[1].value))


def _round9(x: float) -> float:
    # <= 9 significant digits in the serialized form
    return float(f"{x:.9g}")


def write_feature_store(path: str, store: FeatureStore) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, kind in store.all_items():
            vec = store.vector(key, kind)
            row = {
                "item": key,
                "kind": kind.value,
                "dims": vec.dims,
                "values": [_round9(v) for v in vec.values.tolist()],
            }
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_feature_store(path: str) -> FeatureStore:
    if not os.path.isfile(path):
        raise CatalogFormatError(f"missing catalog file: {path}")
    vectors: dict[tuple[str, FeatureKind], FeatureVector] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                kind = FeatureKind(row["kind"])
                vec = _vector(kind, np.array(row["values"], dtype=np.float64))
                if vec.dims != row["dims"]:
                    raise ValueError(f"dims field says {row['dims']}, values have {vec.dims}")
                ItemKey.parse(row["item"])
            except Exception as exc:
                raise CatalogFormatError(f"{path}:{lineno}: {exc}")
            vectors[(row["item"], kind)] = vec
    return FeatureStore(vectors)


def write_detections(path: str, detections: Iterable[ConceptDetection]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for det in detections:
            row = {
                "item": det.item.canonical(),
                "source": det.source,
                "conceptId": det.concept_id,
                "score": _round9(det.score),
            }
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_detections(path: str) -> list[ConceptDetection]:
    if not os.path.isfile(path):
        raise CatalogFormatError(f"missing catalog file: {path}")
    detections = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                det = ConceptDetection(
                    ItemKey.parse(row["item"]), row["source"], row["conceptId"], float(row["score"])
                )
                if not 0.0 <= det.score <= 1.0:
                    raise ValueError(f"score {det.score} outside [0, 1]")
            except Exception as exc:
                raise CatalogFormatError(f"{path}:{lineno}: {exc}")
            detections.append(det)
    return detections
