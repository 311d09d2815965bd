from .features import FEATURE_DIM, load_patch_png, save_patch_png, toy_extract
from .registry import (
    DEFAULT_ABSOLUTE_THRESHOLD,
    DEFAULT_RATIO_THRESHOLD,
    DEFAULT_TARGET_SAMPLES,
    UNKNOWN,
    ClassificationResult,
    ClassRecord,
    ClassRegistry,
    TeachingSession,
    add_sample,
    begin_teaching,
    classify,
    finalize_class,
    load_registry,
    remove_class,
    save_registry,
)

__all__ = [
    "DEFAULT_ABSOLUTE_THRESHOLD",
    "DEFAULT_RATIO_THRESHOLD",
    "DEFAULT_TARGET_SAMPLES",
    "FEATURE_DIM",
    "UNKNOWN",
    "ClassRecord",
    "ClassRegistry",
    "ClassificationResult",
    "TeachingSession",
    "add_sample",
    "begin_teaching",
    "classify",
    "finalize_class",
    "load_patch_png",
    "load_registry",
    "remove_class",
    "save_patch_png",
    "save_registry",
    "toy_extract",
]
