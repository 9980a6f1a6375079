"""Read-only HTTP API over one immutable catalog snapshot.

Every handler parses its own query parameters so malformed input always
produces a 400 naming the parameter, and every response body is built from
plain dicts with fixed key order, making byte-stable output a property of
the snapshot alone. Engine exceptions map to a closed set of error codes.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .catalog import CatalogSnapshot, Granularity, ItemKey, VideoRecord
from .errors import BadParamError, DivexError, OrdinalOutOfRangeError
from .explore import (
    DEFAULT_SEGMENT_SEC,
    DEFAULT_TAU,
    DEFAULT_TOP_N,
    Featuremap,
    FeaturemapDescriptor,
    FilterCriteria,
    FilterMode,
    FilterOrder,
    FilterUnit,
    Segment,
    build_featuremap,
    filter_videos,
    maps_for_concept,
)
from .features import FeatureKind
from .ingest import ppm_bytes, read_frame, scale_to_max_edge
from .search import Measure, RankedHit, concept_query, knn, metadata_query
from .som import GridLayout, LayoutMode, grid_shape

DEFAULT_K = 20

_STATUS_BY_CODE = {
    "bad_manifest": 400,
    "duplicate_video": 400,
    "bad_frame_dir": 500,
    "bad_ppm": 500,
    "unknown_video": 404,
    "ordinal_out_of_range": 404,
    "bad_item_key": 400,
    "bad_score_file": 400,
    "feature_mismatch": 400,
    "missing_feature": 404,
    "no_such_concept": 404,
    "grid_capacity": 409,
    "invalid_criteria": 400,
    "corrupt_catalog": 500,
    "bad_param": 400,
    "internal": 500,
}


@dataclass(frozen=True)
class ServiceConfig:
    catalog_dir: str = ""
    bind: str = "127.0.0.1:8080"
    thumb_max_edge: int = 256
    som_seed: int = 0
    default_k: int = DEFAULT_K
    default_top_n: int = DEFAULT_TOP_N
    default_tau: float = DEFAULT_TAU

    @staticmethod
    def from_env(base: "ServiceConfig") -> "ServiceConfig":
        """Apply DIVEX_* environment overrides on top of a base config."""
        def pick(name: str, cast, current):
            raw = os.environ.get(name)
            return current if raw is None else cast(raw)

        return ServiceConfig(
            catalog_dir=pick("DIVEX_CATALOG", str, base.catalog_dir),
            bind=pick("DIVEX_BIND", str, base.bind),
            thumb_max_edge=pick("DIVEX_THUMB_MAX_EDGE", int, base.thumb_max_edge),
            som_seed=pick("DIVEX_SOM_SEED", int, base.som_seed),
            default_k=pick("DIVEX_K", int, base.default_k),
            default_top_n=pick("DIVEX_TOP_N", int, base.default_top_n),
            default_tau=pick("DIVEX_TAU", float, base.default_tau),
        )

    def host_port(self) -> tuple[str, int]:
        host, sep, port = self.bind.rpartition(":")
        if not sep or not port.isdigit():
            raise ValueError(f"bind address must be host:port, got {self.bind!r}")
        return host, int(port)


class _MapCache:
    """Per-key cache with single-flight construction.

    Concurrent requests for the same key block on one lock while the first
    caller builds; distinct keys build in parallel. Failed builds cache
    nothing and re-raise for every waiting caller.
    """

    def __init__(self):
        self._guard = threading.Lock()
        self._locks: dict = {}
        self._built: dict = {}

    def get(self, key, build):
        hit = self._built.get(key)
        if hit is not None:
            return hit
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            hit = self._built.get(key)
            if hit is not None:
                return hit
            value = build()
            self._built[key] = value
            return value

    def put(self, key, value) -> None:
        self._built[key] = value


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


def _params(request: Request) -> dict[str, str]:
    return dict(request.query_params)


def _parse_int(params: dict, name: str, default: int, minimum: int = 1) -> int:
    raw = params.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise BadParamError(name, f"parameter {name!r} must be an integer, got {raw!r}")
    if value < minimum:
        raise BadParamError(name, f"parameter {name!r} must be >= {minimum}, got {value}")
    return value


def _parse_float(params: dict, name: str, default: float | None) -> float | None:
    raw = params.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise BadParamError(name, f"parameter {name!r} must be a number, got {raw!r}")


def _parse_enum(params: dict, name: str, enum_cls, default):
    raw = params.get(name)
    if raw is None:
        return default
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise BadParamError(name, f"parameter {name!r} must be one of: {allowed}; got {raw!r}")


def _parse_year(params: dict, name: str) -> int | None:
    raw = params.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise BadParamError(name, f"parameter {name!r} must be an integer year, got {raw!r}")


def _parse_tokens(params: dict, name: str, required: bool) -> list[str]:
    raw = params.get(name)
    if raw is None or raw.strip() == "":
        if required:
            raise BadParamError(name, f"parameter {name!r} is required")
        return []
    tokens = [t.strip() for t in raw.split(",")]
    if any(not t for t in tokens):
        raise BadParamError(name, f"parameter {name!r} holds an empty token: {raw!r}")
    return tokens


_FILTER_PARAMS = ("yearFrom", "yearTo", "concepts", "mode", "unit", "segmentSec", "tau", "order")


def _parse_criteria(params: dict, default_tau: float) -> FilterCriteria:
    tau = _parse_float(params, "tau", default_tau)
    segment_sec = _parse_float(params, "segmentSec", DEFAULT_SEGMENT_SEC)
    return FilterCriteria(
        year_from=_parse_year(params, "yearFrom"),
        year_to=_parse_year(params, "yearTo"),
        concepts=tuple(_parse_tokens(params, "concepts", required=False)),
        mode=_parse_enum(params, "mode", FilterMode, FilterMode.FREQUENCY),
        unit=_parse_enum(params, "unit", FilterUnit, FilterUnit.VIDEO),
        segment_sec=segment_sec,
        tau=tau,
        order=_parse_enum(params, "order", FilterOrder, FilterOrder.PERIOD),
    )


def _video_api(snapshot: CatalogSnapshot, video: VideoRecord) -> dict:
    return {
        "videoId": video.video_id,
        "fps": video.fps,
        "durationSec": video.duration_sec,
        "creationTime": video.creation_time,
        "title": video.title,
        "description": video.description,
        "frameCount": video.frame_count,
        "shotCount": len(snapshot.shots.get(video.video_id, ())),
        "sampleCount": len(snapshot.samples.get(video.video_id, ())),
    }


def _hit_api(snapshot: CatalogSnapshot, hit: RankedHit) -> dict:
    resolved = snapshot.resolve(hit.item)
    row = {
        "item": hit.item.canonical(),
        "videoId": hit.item.video_id,
        "kind": hit.item.granularity.value,
        "ordinal": hit.item.ordinal,
        "score": _round9(hit.score),
    }
    if resolved.shot is not None:
        row["startFrame"] = resolved.shot.start_frame
        row["endFrame"] = resolved.shot.end_frame
        row["thumbFrame"] = resolved.shot.keyframe
    else:
        row["tSec"] = resolved.sample.t_sec
        row["thumbFrame"] = resolved.sample.frame_index
    return row


def _map_api(snapshot: CatalogSnapshot, fmap: Featuremap, organization: LayoutMode, measure: Measure, top_n: int) -> dict:
    cells = []
    for cell in sorted(fmap.layout.cells):
        item = fmap.layout.cells[cell]
        resolved = snapshot.resolve(item)
        cells.append(
            {
                "cell": cell,
                "item": item.canonical(),
                "videoId": item.video_id,
                "thumbFrame": resolved.shot.keyframe,
                "score": _round9(fmap.scores[item.canonical()]),
            }
        )
    return {
        "concept": fmap.descriptor.concept,
        "source": fmap.descriptor.source,
        "organization": organization.value,
        "measure": measure.kind.value,
        "topN": top_n,
        "itemCount": fmap.descriptor.item_count,
        "width": fmap.layout.width,
        "height": fmap.layout.height,
        "cells": cells,
    }


def _error_response(status: int, code: str, message: str, detail) -> JSONResponse:
    body = {"httpStatus": status, "code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(body, status_code=status)


def create_app(
    snapshot: CatalogSnapshot,
    config: ServiceConfig = ServiceConfig(),
    precomputed: list[tuple[str, str, GridLayout]] | None = None,
) -> FastAPI:
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )
    cache = _MapCache()
    concept_measure = Measure.for_kind(FeatureKind.CONCEPT)

    # precomputed som layouts from ingest warm the cache for the default
    # parameter combination; they take precedence over a live rebuild
    for concept, source, layout in precomputed or []:
        postings = [
            (item, score)
            for item, score in snapshot.concept_index.postings_for(concept, source)
            if item.granularity is Granularity.SHOT
        ]
        if not postings:
            continue
        chosen = postings[: config.default_top_n]
        descriptor = FeaturemapDescriptor(concept, source, len(postings), grid_shape(len(chosen)))
        fmap = Featuremap(descriptor, layout, {item.canonical(): score for item, score in chosen})
        cache.put((concept, source, layout.mode, concept_measure.kind, config.default_top_n), fmap)

    @app.exception_handler(DivexError)
    async def divex_error_handler(request: Request, exc: DivexError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return _error_response(status, exc.code, exc.message, exc.detail)

    @app.exception_handler(Exception)
    async def fallback_error_handler(request: Request, exc: Exception):
        return _error_response(500, "internal", str(exc), None)

    @app.get("/status")
    def status():
        return {
            "videos": snapshot.video_count,
            "shots": sum(len(s) for s in snapshot.shots.values()),
            "frames": sum(len(s) for s in snapshot.samples.values()),
            "sources": snapshot.sources(),
        }

    @app.get("/videos")
    def videos():
        ordered = sorted(snapshot.videos, key=lambda v: v.video_id)
        return {"videos": [_video_api(snapshot, v) for v in ordered]}

    @app.get("/videos/{video_id}")
    def video_detail(video_id: str):
        video = snapshot.video(video_id)
        body = _video_api(snapshot, video)
        body["shots"] = [
            {
                "shotIndex": s.shot_index,
                "startFrame": s.start_frame,
                "endFrame": s.end_frame,
                "keyframe": s.keyframe,
            }
            for s in snapshot.shots.get(video_id, ())
        ]
        body["samples"] = [
            {"tSec": s.t_sec, "frameIndex": s.frame_index} for s in snapshot.samples.get(video_id, ())
        ]
        return body

    @app.get("/search/concepts")
    def search_concepts(request: Request):
        params = _params(request)
        tokens = _parse_tokens(params, "q", required=True)
        source = params.get("source") or None
        threshold = _parse_float(params, "threshold", 0.0)
        granularity = _parse_enum(params, "granularity", Granularity, Granularity.SHOT)
        k = _parse_int(params, "k", config.default_k)
        hits = concept_query(
            snapshot.concept_index, tokens, source=source, threshold=threshold, granularity=granularity, k=k
        )
        return {
            "query": {
                "tokens": [t.lower() for t in tokens],
                "source": source,
                "threshold": _round9(threshold),
                "granularity": granularity.value,
                "k": k,
            },
            "hits": [_hit_api(snapshot, h) for h in hits],
        }

    @app.get("/search/metadata")
    def search_metadata(request: Request):
        params = _params(request)
        text = params.get("q")
        if not text:
            raise BadParamError("q", "parameter 'q' is required")
        k = _parse_int(params, "k", config.default_k)
        ids = metadata_query(snapshot, text, k=k)
        return {
            "query": {"text": text, "k": k},
            "hits": [
                {
                    "videoId": vid,
                    "title": snapshot.video(vid).title,
                    "description": snapshot.video(vid).description,
                    "creationTime": snapshot.video(vid).creation_time,
                }
                for vid in ids
            ],
        }

    @app.get("/similar/{item_key:path}")
    def similar(item_key: str, request: Request):
        params = _params(request)
        query = ItemKey.parse(item_key)
        kind = _parse_enum(params, "measure", FeatureKind, FeatureKind.CONCEPT)
        measure = Measure.for_kind(kind)
        granularity = _parse_enum(params, "granularity", Granularity, query.granularity)
        k = _parse_int(params, "k", config.default_k)
        restrict = None
        if any(p in params for p in _FILTER_PARAMS):
            restrict = _parse_criteria(params, config.default_tau)
        hits = knn(snapshot, query, measure, granularity, k, restrict=restrict)
        return {
            "query": {
                "item": query.canonical(),
                "measure": kind.value,
                "granularity": granularity.value,
                "k": k,
                "restricted": restrict is not None,
            },
            "hits": [_hit_api(snapshot, h) for h in hits],
        }

    @app.get("/featuremaps")
    def featuremaps(request: Request):
        params = _params(request)
        concept = params.get("concept")
        if not concept:
            raise BadParamError("concept", "parameter 'concept' is required")
        maps = maps_for_concept(snapshot, concept, top_n=config.default_top_n)
        return {
            "concept": concept.lower(),
            "maps": [
                {
                    "concept": d.concept,
                    "source": d.source,
                    "itemCount": d.item_count,
                    "gridShape": list(d.grid_shape),
                }
                for d in maps
            ],
        }

    @app.get("/featuremaps/{concept}/{source}")
    def featuremap_detail(concept: str, source: str, request: Request):
        params = _params(request)
        organization = _parse_enum(params, "organization", LayoutMode, LayoutMode.SOM)
        kind = _parse_enum(params, "measure", FeatureKind, FeatureKind.CONCEPT)
        measure = Measure.for_kind(kind)
        top_n = _parse_int(params, "topN", config.default_top_n)
        key = (concept.lower(), source, organization, measure.kind, top_n)
        fmap = cache.get(
            key,
            lambda: build_featuremap(
                snapshot,
                concept,
                source,
                top_n=top_n,
                organization=organization,
                measure=measure,
                seed=config.som_seed,
            ),
        )
        return _map_api(snapshot, fmap, organization, measure, top_n)

    @app.get("/filter")
    def filter_endpoint(request: Request):
        params = _params(request)
        criteria = _parse_criteria(params, config.default_tau)
        rows = filter_videos(snapshot, criteria)
        results = []
        for scope, value in rows:
            if isinstance(scope, Segment):
                results.append(
                    {
                        "videoId": scope.video_id,
                        "segIndex": scope.seg_index,
                        "startSec": _round9(scope.start_sec),
                        "endSec": _round9(scope.end_sec),
                        "value": _round9(value),
                    }
                )
            else:
                results.append(
                    {
                        "videoId": scope.video_id,
                        "creationTime": scope.creation_time,
                        "year": scope.creation_dt.year,
                        "value": _round9(value),
                    }
                )
        return {
            "criteria": {
                "yearFrom": criteria.year_from,
                "yearTo": criteria.year_to,
                "concepts": list(criteria.concepts),
                "mode": criteria.mode.value,
                "unit": criteria.unit.value,
                "segmentSec": _round9(criteria.segment_sec),
                "tau": _round9(criteria.tau),
                "order": criteria.order.value,
            },
            "results": results,
        }

    @app.get("/thumbs/{video_id}/{frame_file}")
    def thumb(video_id: str, frame_file: str):
        if not frame_file.endswith(".ppm"):
            raise BadParamError("frame", f"expected <frameIndex>.ppm, got {frame_file!r}")
        stem = frame_file[: -len(".ppm")]
        if not stem.isdigit():
            raise BadParamError("frame", f"frame index must be a nonnegative integer, got {stem!r}")
        frame_index = int(stem)
        video = snapshot.video(video_id)
        if frame_index >= video.frame_count:
            raise OrdinalOutOfRangeError(f"{video_id}/{frame_index}", video.frame_count)
        frame = read_frame(video.frame_path, frame_index)
        thumbnail = scale_to_max_edge(frame, config.thumb_max_edge)
        return Response(content=ppm_bytes(thumbnail), media_type="image/x-portable-pixmap")

    return app


def serve(snapshot: CatalogSnapshot, config: ServiceConfig, precomputed=None) -> None:
    """Run the API until interrupted."""
    import uvicorn

    app = create_app(snapshot, config, precomputed)
    host, port = config.host_port()
    uvicorn.run(app, host=host, port=port, log_level="warning")
