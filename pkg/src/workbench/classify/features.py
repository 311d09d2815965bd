"""Toy feature extractor standing in for a learned backbone.

Concatenates a 32-bin intensity histogram with an 8-bin gradient-orientation
histogram (magnitude-weighted) and L2-normalizes. Deterministic, cheap, and
discriminative enough for synthetic-texture tests.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from ..errors import InvalidInput

INTENSITY_BINS = 32
ORIENTATION_BINS = 8
FEATURE_DIM = INTENSITY_BINS + ORIENTATION_BINS


def toy_extract(patch: np.ndarray) -> np.ndarray:
    """Feature vector of a grayscale patch (2-D array, uint8 or [0, 1] float)."""
    patch = np.asarray(patch)
    if patch.ndim != 2 or patch.shape[0] < 2 or patch.shape[1] < 2:
        raise InvalidInput("patch must be a 2-D grayscale image, at least 2x2")
    if np.issubdtype(patch.dtype, np.integer):
        img = patch.astype(float) / 255.0
    else:
        img = patch.astype(float)
    if not np.all(np.isfinite(img)):
        raise InvalidInput("patch contains non-finite values")

    intensity = np.bincount(
        np.clip((img * INTENSITY_BINS).astype(int), 0, INTENSITY_BINS - 1).ravel(),
        minlength=INTENSITY_BINS,
    ).astype(float)
    intensity /= img.size

    gy, gx = np.gradient(img)
    magnitude = np.hypot(gx, gy)
    moving = magnitude > 1e-12
    orientation = np.zeros(ORIENTATION_BINS)
    if moving.any():
        theta = np.arctan2(gy[moving], gx[moving])
        # floor-based cyclic binning so a 90-degree rotation shifts exactly 2 bins
        bins = np.floor((theta + np.pi) / (2.0 * np.pi / ORIENTATION_BINS)).astype(int)
        bins %= ORIENTATION_BINS
        orientation = np.bincount(
            bins, weights=magnitude[moving], minlength=ORIENTATION_BINS
        ).astype(float)

    feature = np.concatenate([intensity, orientation])
    norm = np.linalg.norm(feature)
    return feature / norm


def load_patch_png(path) -> np.ndarray:
    """8-bit grayscale PNG -> 2-D uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_patch_png(path, patch: np.ndarray) -> None:
    patch = np.asarray(patch)
    if patch.ndim != 2:
        raise InvalidInput("patch must be 2-D")
    if not np.issubdtype(patch.dtype, np.integer):
        patch = np.clip(patch * 255.0, 0, 255).astype(np.uint8)
    Image.fromarray(patch.astype(np.uint8), mode="L").save(path, format="PNG")
