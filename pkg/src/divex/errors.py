"""Exception types shared across the engine.

Every error carries a machine-readable ``code`` so the HTTP layer can map
exceptions to stable API error bodies without string matching.
"""
from __future__ import annotations


class DivexError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ManifestError(DivexError):
    """Manifest file missing, unreadable, or a line failed validation."""

    code = "bad_manifest"

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        detail: dict = {}
        if line is not None:
            detail["line"] = line
        if path is not None:
            detail["path"] = path
        super().__init__(message, detail or None)
        self.line = line
        self.path = path


class DuplicateVideoError(ManifestError):
    code = "duplicate_video"


class FrameDirectoryError(DivexError):
    """Frame directory missing, has numbering gaps, or holds a bad PPM file."""

    code = "bad_frame_dir"


class PpmFormatError(DivexError):
    """File is not a binary (P6, maxval 255) PPM image."""

    code = "bad_ppm"


class UnknownVideoError(DivexError):
    code = "unknown_video"

    def __init__(self, video_id: str):
        super().__init__(f"unknown video {video_id!r}", {"videoId": video_id})
        self.video_id = video_id


class OrdinalOutOfRangeError(DivexError):
    """ItemKey names a shot/sample ordinal the video does not have."""

    code = "ordinal_out_of_range"

    def __init__(self, key: str, limit: int):
        super().__init__(f"item {key!r} is out of range (have {limit})", {"item": key, "count": limit})


class BadItemKeyError(DivexError):
    code = "bad_item_key"


class ScoreFileError(DivexError):
    """Concept score CSV failed validation; detail carries the row number."""

    code = "bad_score_file"

    def __init__(self, message: str, *, row: int | None = None, path: str | None = None):
        detail: dict = {}
        if row is not None:
            detail["row"] = row
        if path is not None:
            detail["path"] = path
        super().__init__(message, detail or None)
        self.row = row
        self.path = path


class FeatureMismatchError(DivexError):
    """Vector kinds or dimensions do not line up for a distance computation."""

    code = "feature_mismatch"


class MissingFeatureError(DivexError):
    """Query item has no stored vector of the requested kind."""

    code = "missing_feature"

    def __init__(self, key: str, kind: str):
        super().__init__(f"item {key!r} has no {kind} feature", {"item": key, "kind": kind})


class UnknownConceptError(DivexError):
    """Token(s) absent from every source vocabulary: a typo, not zero hits."""

    code = "no_such_concept"

    def __init__(self, tokens: list[str]):
        super().__init__("unknown concept(s): " + ", ".join(tokens), {"tokens": list(tokens)})
        self.tokens = list(tokens)


class CapacityError(DivexError):
    """More items than grid cells."""

    code = "grid_capacity"


class InvalidCriteriaError(DivexError):
    code = "invalid_criteria"


class CatalogFormatError(DivexError):
    """Catalog directory is missing files or holds malformed records."""

    code = "corrupt_catalog"


class BadParamError(DivexError):
    """HTTP query or path parameter failed to parse; detail names it."""

    code = "bad_param"

    def __init__(self, param: str, message: str):
        super().__init__(message, {"param": param})
        self.param = param
