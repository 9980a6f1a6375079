"""divex: an interactive video exploration engine.

Offline, videos become catalogs: shot boundaries from color histogram
differencing, one-second frame samples, color/texture/motion descriptors,
and concept detections folded in from external score files. Online, an
immutable snapshot answers concept and metadata queries, exact similarity
search under four fixed measures, SOM-organized featuremaps, and a combinable
video filter, over HTTP or directly in Python.
"""

from .catalog import (
    Catalog,
    CatalogSnapshot,
    FrameSampleRecord,
    Granularity,
    ItemKey,
    ShotRecord,
    VideoRecord,
)
from .errors import DivexError
from .explore import (
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
    segment_video,
)
from .features import ConceptDetection, FeatureKind, FeatureVector
from .ingest import Frame, ShotParams, detect_shots, read_ppm, sample_uniform, write_ppm
from .pipeline import build_snapshot, ingest, load_catalog
from .search import Measure, Metric, RankedHit, concept_query, knn, metadata_query
from .service import ServiceConfig, create_app, serve
from .som import GridLayout, LayoutMode, SomGrid, SomParams, train_som

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogSnapshot",
    "ConceptDetection",
    "DivexError",
    "FeatureKind",
    "FeatureVector",
    "Featuremap",
    "FeaturemapDescriptor",
    "FilterCriteria",
    "FilterMode",
    "FilterOrder",
    "FilterUnit",
    "Frame",
    "FrameSampleRecord",
    "Granularity",
    "GridLayout",
    "ItemKey",
    "LayoutMode",
    "Measure",
    "Metric",
    "RankedHit",
    "Segment",
    "ServiceConfig",
    "ShotParams",
    "ShotRecord",
    "SomGrid",
    "SomParams",
    "VideoRecord",
    "build_featuremap",
    "build_snapshot",
    "concept_query",
    "create_app",
    "detect_shots",
    "filter_videos",
    "ingest",
    "knn",
    "load_catalog",
    "maps_for_concept",
    "metadata_query",
    "read_ppm",
    "sample_uniform",
    "segment_video",
    "serve",
    "train_som",
    "write_ppm",
]
