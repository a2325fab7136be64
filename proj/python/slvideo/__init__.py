"""Python bindings for the slvideo retrieval core."""

from ._slvideo import (
    MockEncoder,
    SearchHit,
    SlvideoError,
    VectorIndex,
    f1_score,
    keyframe_timestamps,
    median,
    normalize_text,
    parse_eaf,
    run_cli,
)

__all__ = [
    "MockEncoder",
    "SearchHit",
    "SlvideoError",
    "VectorIndex",
    "f1_score",
    "keyframe_timestamps",
    "median",
    "normalize_text",
    "parse_eaf",
    "run_cli",
]
