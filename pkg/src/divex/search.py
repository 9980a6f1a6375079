"""Online query core: distance measures, exact kNN, concept and metadata search.

All searches run as exact scans over the snapshot's in-memory stores; result
ordering is fully deterministic (ties break on the canonical item key).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .catalog import CatalogSnapshot, Granularity, ItemKey
from .errors import FeatureMismatchError, MissingFeatureError, UnknownConceptError
from .features import ConceptDetection, FeatureKind, FeatureVector

if TYPE_CHECKING:  # pragma: no cover
    from .explore import FilterCriteria


class Metric(str, Enum):
    COSINE_DISTANCE = "cosineDistance"
    L1 = "l1"
    L2 = "l2"


_KIND_METRIC = {
    FeatureKind.CONCEPT: Metric.COSINE_DISTANCE,
    FeatureKind.COLOR: Metric.L1,
    FeatureKind.TEXTURE: Metric.L1,
    FeatureKind.MOTION: Metric.L2,
}


@dataclass(frozen=True)
class Measure:
    """A similarity measure: feature kind with its fixed metric pairing."""

    kind: FeatureKind
    metric: Metric

    def __post_init__(self):
        if _KIND_METRIC[self.kind] is not self.metric:
            raise ValueError(f"{self.kind.value} must pair with {_KIND_METRIC[self.kind].value}")

    @classmethod
    def for_kind(cls, kind: FeatureKind | str) -> "Measure":
        kind = FeatureKind(kind)
        return cls(kind, _KIND_METRIC[kind])


@dataclass(frozen=True)
class RankedHit:
    item: ItemKey
    score: float


def distance(a: FeatureVector, b: FeatureVector, m: Measure) -> float:
    """Distance between two vectors under a measure. Non-negative, 0 for a==b."""
    if a.kind is not m.kind or b.kind is not m.kind:
        raise FeatureMismatchError(
            f"measure is {m.kind.value}, vectors are {a.kind.value}/{b.kind.value}"
        )
    if a.dims != b.dims:
        raise FeatureMismatchError(f"dimension mismatch: {a.dims} vs {b.dims}")
    if m.metric is Metric.L1:
        return float(np.abs(a.values - b.values).sum())
    if m.metric is Metric.L2:
        return float(np.sqrt(((a.values - b.values) ** 2).sum()))
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    return max(0.0, 1.0 - float(a.values @ b.values) / (na * nb))


def _distances_to(matrix: np.ndarray, q: np.ndarray, metric: Metric) -> np.ndarray:
    if metric is Metric.L1:
        return np.abs(matrix - q).sum(axis=1)
    if metric is Metric.L2:
        return np.sqrt(((matrix - q) ** 2).sum(axis=1))
    nq = np.linalg.norm(q)
    nx = np.linalg.norm(matrix, axis=1)
    out = np.empty(matrix.shape[0], dtype=np.float64)
    if nq == 0.0:
        out[:] = np.where(nx == 0.0, 0.0, 1.0)
        return out
    zero = nx == 0.0
    safe = np.where(zero, 1.0, nx)
    out = 1.0 - (matrix @ q) / (safe * nq)
    out[zero] = 1.0
    return np.maximum(out, 0.0)


def knn(
    snapshot: CatalogSnapshot,
    query: ItemKey,
    measure: Measure,
    granularity: Granularity,
    k: int,
    restrict: "FilterCriteria | None" = None,
) -> list[RankedHit]:
    """Exact top-k nearest items of one granularity, by ascending distance.

    The scan covers every item possessing the measure's feature kind except
    the query item itself; `restrict` pre-filters candidates through the
    video filter's criteria. Ties break on the canonical key.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    snapshot.resolve(query)
    qvec = snapshot.features.vector(query, measure.kind)
    if qvec is None:
        raise MissingFeatureError(query.canonical(), measure.kind.value)
    items, matrix = snapshot.features.matrix(granularity, measure.kind)
    if not items:
        return []
    if matrix.shape[1] != qvec.dims:
        raise FeatureMismatchError(f"dimension mismatch: {matrix.shape[1]} vs {qvec.dims}")
    keep = np.ones(len(items), dtype=bool)
    for i, item in enumerate(items):
        if item == query:
            keep[i] = False
    if restrict is not None:
        from .explore import restrict_predicate  # deferred: explore imports search

        pred = restrict_predicate(snapshot, restrict)
        for i, item in enumerate(items):
            if keep[i] and not pred(item):
                keep[i] = False
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        return []
    dists = _distances_to(matrix[idx], qvec.values, measure.metric)
    # items are pre-sorted by canonical key, so a stable sort on distance
    # yields the declared tie-break for free
    order = np.argsort(dists, kind="stable")[:k]
    return [RankedHit(items[idx[j]], float(dists[j])) for j in order]


@dataclass(frozen=True)
class ConceptIndex:
    """Inverted index: (source, conceptId) -> postings sorted by score desc."""

    postings: Mapping[tuple[str, str], tuple[tuple[ItemKey, float], ...]]
    vocabularies: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def sources(self) -> list[str]:
        return sorted(self.vocabularies)

    def known(self, concept_id: str) -> bool:
        return any(concept_id in vocab for vocab in self.vocabularies.values())

    def sources_knowing(self, concept_id: str) -> list[str]:
        return sorted(src for src, vocab in self.vocabularies.items() if concept_id in vocab)

    def postings_for(self, concept_id: str, source: str | None = None) -> list[tuple[ItemKey, float]]:
        if source is not None:
            return list(self.postings.get((source, concept_id), ()))
        merged = []
        for (src, cid), plist in self.postings.items():
            if cid == concept_id:
                merged.extend(plist)
        return merged


def build_concept_index(detections: Iterable[ConceptDetection]) -> ConceptIndex:
    """Index shot- and frame-level detections; one entry per (source, concept, item)."""
    best: dict[tuple[str, str], dict[ItemKey, float]] = {}
    vocab: dict[str, set[str]] = {}
    for det in detections:
        vocab.setdefault(det.source, set()).add(det.concept_id)
        slot = best.setdefault((det.source, det.concept_id), {})
        if det.score > slot.get(det.item, -1.0):
            slot[det.item] = det.score
    postings = {
        key: tuple(sorted(items.items(), key=lambda kv: (-kv[1], kv[0].canonical())))
        for key, items in best.items()
    }
    return ConceptIndex(postings, {src: tuple(sorted(ids)) for src, ids in vocab.items()})


def concept_query(
    index: ConceptIndex,
    tokens: Sequence[str],
    source: str | None = None,
    threshold: float = 0.0,
    granularity: Granularity = Granularity.SHOT,
    k: int = 20,
) -> list[RankedHit]:
    """AND-query over concept tokens with a per-token score threshold.

    An item qualifies iff every token has a detection for it with score >=
    threshold (within `source` when set, otherwise any source); the item
    score is the sum of its best per-token scores. Tokens absent from every
    vocabulary raise UnknownConceptError so clients can tell typos from
    zero-hit queries.
    """
    if not tokens:
        raise ValueError("concept query needs at least one token")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    tokens = [t.lower() for t in tokens]
    unknown = sorted({t for t in tokens if not index.known(t)})
    if unknown:
        raise UnknownConceptError(unknown)
    threshold = max(threshold, 0.0)
    per_item: dict[ItemKey, float] | None = None
    for token in tokens:
        bests: dict[ItemKey, float] = {}
        for item, score in index.postings_for(token, source):
            if item.granularity is granularity and score >= threshold:
                if score > bests.get(item, -1.0):
                    bests[item] = score
        if per_item is None:
            per_item = bests
        else:
            per_item = {item: total + bests[item] for item, total in per_item.items() if item in bests}
        if not per_item:
            return []
    ranked = sorted(per_item.items(), key=lambda kv: (-kv[1], kv[0].canonical()))
    return [RankedHit(item, score) for item, score in ranked[:k]]


def metadata_query(snapshot: CatalogSnapshot, text: str, k: int = 20) -> list[str]:
    """Case-insensitive substring match over video title and description."""
    if not text:
        raise ValueError("metadata query text must be non-empty")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    needle = text.lower()
    hits = [
        v.video_id
        for v in snapshot.videos
        if needle in v.title.lower() or needle in v.description.lower()
    ]
    return sorted(hits)[:k]
