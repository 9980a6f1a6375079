"""Exploratory views: concept featuremaps and the video similarity filter.

Featuremaps collect the best shots for one (concept, source) pair onto a
small grid, organized by SOM similarity, confidence rank, or video
affiliation. The filter selects whole videos or fixed-length segments by
creation period and per-concept frequency/confidence predicates, all
combinable, and orders the survivors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .catalog import CatalogSnapshot, Granularity, ItemKey, VideoRecord
from .errors import (
    CatalogFormatError,
    InvalidCriteriaError,
    MissingFeatureError,
    UnknownConceptError,
)
from .features import FeatureKind
from .search import Measure
from .som import (
    GridLayout,
    LayoutMode,
    SomParams,
    assign_unique_cells,
    grid_shape,
    order_layout,
    train_som,
)

DEFAULT_TOP_N = 64
DEFAULT_SEGMENT_SEC = 30.0
DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class FeaturemapDescriptor:
    """One map's identity card: which net knows the concept and how big the
    default grid comes out. item_count is the total number of shots carrying
    the concept; the grid holds min(item_count, top_n) of them."""

    concept: str
    source: str
    item_count: int
    grid_shape: tuple[int, int]


@dataclass(frozen=True)
class Featuremap:
    descriptor: FeaturemapDescriptor
    layout: GridLayout
    scores: Mapping[str, float]  # canonical key -> shot-level score


class FilterMode(str, Enum):
    FREQUENCY = "frequency"
    CONFIDENCE = "confidence"


class FilterUnit(str, Enum):
    VIDEO = "video"
    SEGMENT = "segment"


class FilterOrder(str, Enum):
    PERIOD = "period"
    VALUE = "value"


@dataclass(frozen=True)
class FilterCriteria:
    year_from: int | None = None
    year_to: int | None = None
    concepts: tuple[str, ...] = ()
    mode: FilterMode = FilterMode.FREQUENCY
    unit: FilterUnit = FilterUnit.VIDEO
    segment_sec: float = DEFAULT_SEGMENT_SEC
    tau: float = DEFAULT_TAU
    order: FilterOrder = FilterOrder.PERIOD

    def __post_init__(self):
        if self.year_from is not None and self.year_to is not None and self.year_from > self.year_to:
            raise InvalidCriteriaError(f"yearFrom {self.year_from} exceeds yearTo {self.year_to}")
        if any(not c for c in self.concepts):
            raise InvalidCriteriaError("empty concept token")
        if self.segment_sec <= 0:
            raise InvalidCriteriaError(f"segmentSec must be positive, got {self.segment_sec}")
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidCriteriaError(f"tau must lie in [0,1], got {self.tau}")
        if self.order is FilterOrder.VALUE and not self.concepts:
            raise InvalidCriteriaError("order=value needs at least one concept")
        object.__setattr__(self, "concepts", tuple(c.lower() for c in self.concepts))


@dataclass(frozen=True)
class Segment:
    video_id: str
    seg_index: int
    start_sec: float
    end_sec: float


Scope = VideoRecord | Segment


def segment_video(video: VideoRecord, segment_sec: float = DEFAULT_SEGMENT_SEC) -> list[Segment]:
    """Partition [0, durationSec) into fixed windows; the last may be short."""
    if segment_sec <= 0:
        raise InvalidCriteriaError(f"segmentSec must be positive, got {segment_sec}")
    segments = []
    i = 0
    while i * segment_sec < video.duration_sec:
        start = i * segment_sec
        end = min((i + 1) * segment_sec, video.duration_sec)
        segments.append(Segment(video.video_id, i, start, end))
        i += 1
    return segments


def _scope_samples(snapshot: CatalogSnapshot, scope: Scope) -> list[tuple[str, int]]:
    samples = snapshot.samples.get(scope.video_id, ())
    if isinstance(scope, VideoRecord):
        return [(s.video_id, s.t_sec) for s in samples]
    return [(s.video_id, s.t_sec) for s in samples if scope.start_sec <= s.t_sec < scope.end_sec]


def _best_score(snapshot: CatalogSnapshot, video_id: str, t_sec: int, concept: str, source: str | None) -> float | None:
    by_pair = snapshot.frame_score_lookup.get((video_id, t_sec))
    if not by_pair:
        return None
    if source is not None:
        return by_pair.get((source, concept))
    scores = [s for (src, cid), s in by_pair.items() if cid == concept]
    return max(scores) if scores else None


def concept_frequency(
    snapshot: CatalogSnapshot, scope: Scope, concept: str, source: str | None = None, tau: float = DEFAULT_TAU
) -> int:
    """Number of frame samples in scope whose best score for the concept >= tau."""
    concept = concept.lower()
    count = 0
    for video_id, t_sec in _scope_samples(snapshot, scope):
        score = _best_score(snapshot, video_id, t_sec, concept, source)
        if score is not None and score >= tau:
            count += 1
    return count


def concept_confidence(
    snapshot: CatalogSnapshot, scope: Scope, concept: str, source: str | None = None
) -> float:
    """Highest sample score for the concept within scope, 0 when absent."""
    concept = concept.lower()
    best = 0.0
    for video_id, t_sec in _scope_samples(snapshot, scope):
        score = _best_score(snapshot, video_id, t_sec, concept, source)
        if score is not None and score > best:
            best = score
    return best


def _year_of(video: VideoRecord) -> int:
    return video.creation_dt.year


def _scope_value(snapshot: CatalogSnapshot, scope: Scope, criteria: FilterCriteria) -> float | None:
    """Combined concept value of one candidate, or None when it fails a predicate.

    Frequency mode: every concept needs count >= 1, value = sum of counts.
    Confidence mode: every concept needs max > 0, value = min of maxima.
    No concepts listed: value 0 (the candidate passes vacuously).
    """
    if not criteria.concepts:
        return 0.0
    if criteria.mode is FilterMode.FREQUENCY:
        total = 0
        for concept in criteria.concepts:
            freq = concept_frequency(snapshot, scope, concept, None, criteria.tau)
            if freq < 1:
                return None
            total += freq
        return float(total)
    worst = None
    for concept in criteria.concepts:
        conf = concept_confidence(snapshot, scope, concept, None)
        if conf <= 0.0:
            return None
        worst = conf if worst is None else min(worst, conf)
    return worst


def filter_videos(snapshot: CatalogSnapshot, criteria: FilterCriteria) -> list[tuple[Scope, float]]:
    """Apply the conjunction of all set criteria and order the survivors.

    order=period sorts by creation time (videoId, then segment index on
    ties); order=value sorts by combined value descending with the same
    tie-break chain.
    """
    videos = list(snapshot.videos)
    if criteria.year_from is not None:
        videos = [v for v in videos if _year_of(v) >= criteria.year_from]
    if criteria.year_to is not None:
        videos = [v for v in videos if _year_of(v) <= criteria.year_to]

    rows: list[tuple[Scope, float]] = []
    for video in videos:
        scopes: Sequence[Scope]
        if criteria.unit is FilterUnit.SEGMENT:
            scopes = segment_video(video, criteria.segment_sec)
        else:
            scopes = [video]
        for scope in scopes:
            value = _scope_value(snapshot, scope, criteria)
            if value is not None:
                rows.append((scope, value))

    by_id = {v.video_id: v for v in snapshot.videos}

    def seg_index(scope: Scope) -> int:
        return scope.seg_index if isinstance(scope, Segment) else 0

    def vid(scope: Scope) -> str:
        return scope.video_id

    if criteria.order is FilterOrder.PERIOD:
        rows.sort(key=lambda r: (by_id[vid(r[0])].creation_dt, vid(r[0]), seg_index(r[0])))
    else:
        rows.sort(key=lambda r: (-r[1], vid(r[0]), seg_index(r[0])))
    return rows


def restrict_predicate(snapshot: CatalogSnapshot, criteria: FilterCriteria) -> Callable[[ItemKey], bool]:
    """Membership test for knn pre-filtering.

    unit=video admits items of qualifying videos; unit=segment admits items
    whose representative instant (sample time for frames, keyframe time for
    shots) falls inside a qualifying segment.
    """
    rows = filter_videos(snapshot, criteria)
    if criteria.unit is FilterUnit.VIDEO:
        allowed = {scope.video_id for scope, _ in rows}

        def admit_video(item: ItemKey) -> bool:
            return item.video_id in allowed

        return admit_video

    windows: dict[str, list[tuple[float, float]]] = {}
    for scope, _ in rows:
        windows.setdefault(scope.video_id, []).append((scope.start_sec, scope.end_sec))

    def admit_segment(item: ItemKey) -> bool:
        spans = windows.get(item.video_id)
        if not spans:
            return False
        resolved = snapshot.resolve(item)
        if item.granularity is Granularity.FRAME:
            t = float(resolved.sample.t_sec)
        else:
            t = resolved.shot.keyframe / resolved.video.fps
        return any(start <= t < end for start, end in spans)

    return admit_segment


def maps_for_concept(snapshot: CatalogSnapshot, concept: str, top_n: int = DEFAULT_TOP_N) -> list[FeaturemapDescriptor]:
    """One descriptor per source whose vocabulary contains the concept."""
    concept = concept.lower()
    descriptors = []
    for source in snapshot.concept_index.sources_knowing(concept):
        count = sum(
            1
            for item, _ in snapshot.concept_index.postings_for(concept, source)
            if item.granularity is Granularity.SHOT
        )
        if count == 0:
            continue
        descriptors.append(
            FeaturemapDescriptor(concept, source, count, grid_shape(min(count, top_n)))
        )
    return descriptors


def build_featuremap(
    snapshot: CatalogSnapshot,
    concept: str,
    source: str,
    top_n: int = DEFAULT_TOP_N,
    organization: LayoutMode = LayoutMode.SOM,
    measure: Measure | None = None,
    seed: int = 0,
) -> Featuremap:
    """Lay the top-N shots for (concept, source) out on a grid.

    som trains a map on the shots' vectors of the requested measure (concept
    vectors by default) and is deterministic given snapshot and seed; the
    other organizations are plain row-major orderings.
    """
    if top_n < 1:
        raise ValueError(f"topN must be positive, got {top_n}")
    concept = concept.lower()
    measure = measure if measure is not None else Measure.for_kind(FeatureKind.CONCEPT)
    postings = [
        (item, score)
        for item, score in snapshot.concept_index.postings_for(concept, source)
        if item.granularity is Granularity.SHOT
    ]
    if not postings:
        raise UnknownConceptError([f"{concept}@{source}"])
    chosen = postings[:top_n]  # postings arrive sorted by (-score, canonical)
    descriptor = FeaturemapDescriptor(concept, source, len(postings), grid_shape(len(chosen)))
    scores = {item.canonical(): score for item, score in chosen}
    if organization is LayoutMode.SOM:
        vectors = [(item, snapshot.features.vector(item, measure.kind)) for item, _ in chosen]
        missing = [item.canonical() for item, vec in vectors if vec is None]
        if missing:
            raise MissingFeatureError(missing[0], measure.kind.value)
        grid = train_som(vectors, SomParams(seed=seed))
        layout = assign_unique_cells(grid, vectors)
    else:
        layout = order_layout(chosen, organization, descriptor.grid_shape)
    return Featuremap(descriptor, layout, scores)


def write_featuremaps(path: Path | str, maps: Sequence[tuple[str, str, GridLayout]]) -> None:
    """Persist precomputed layouts, one JSON object per line."""
    lines = []
    for concept, source, layout in maps:
        lines.append(
            json.dumps(
                {
                    "concept": concept,
                    "source": source,
                    "width": layout.width,
                    "height": layout.height,
                    "mode": layout.mode.value,
                    "cells": [
                        {"cell": cell, "item": layout.cells[cell].canonical()}
                        for cell in sorted(layout.cells)
                    ],
                },
                separators=(",", ":"),
                ensure_ascii=False,
            )
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_featuremaps(path: Path | str) -> list[tuple[str, str, GridLayout]]:
    maps = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            layout = GridLayout(
                LayoutMode(row["mode"]),
                int(row["width"]),
                int(row["height"]),
                {int(c["cell"]): ItemKey.parse(c["item"]) for c in row["cells"]},
            )
            maps.append((row["concept"], row["source"], layout))
        except (KeyError, TypeError, ValueError) as exc:
            raise CatalogFormatError(f"featuremaps line {n}: {exc}") from exc
    return maps
