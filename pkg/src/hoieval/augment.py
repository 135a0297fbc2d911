"""Seeded photometric and occlusion augmentations for 8-bit images.

A pipeline is an ordered list of op specs (plain dicts, e.g. loaded from
JSON)::

    [{"op": "coarse_dropout", "p": 0.5, "holes": [1, 4], "size": [8, 24], "fill": 0},
     {"op": "gaussian_blur", "p": 0.3, "sigma": [0.5, 2.0]},
     {"op": "add", "p": 0.5, "value": [-20, 20], "per_channel": false},
     {"op": "invert", "p": 0.1},
     {"op": "multiply", "p": 0.5, "value": [0.8, 1.2], "per_channel": false},
     {"op": "contrast", "p": 0.5, "alpha": [0.75, 1.25]}]

Scalar-or-range parameters accept either a number or ``[low, high]``. Every
op first draws its trigger from the shared generator, then its parameters
(only when triggered), so a given seed always replays the same edits.
"""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

BLUR_TRUNCATE = 3.0


def _uniform(rng, value):
    if isinstance(value, (list, tuple)):
        lo, hi = float(value[0]), float(value[1])
        return lo if lo == hi else float(rng.uniform(lo, hi))
    return float(value)


def _int_range(rng, value):
    if isinstance(value, (list, tuple)):
        return int(rng.integers(int(value[0]), int(value[1]) + 1))
    return int(value)


def coarse_dropout(img, rng, holes=1, size=8, fill=0):
    """Fill rectangular holes that lie fully inside the image."""
    H, W = img.shape[:2]
    for _ in range(_int_range(rng, holes)):
        if isinstance(size, (list, tuple)) and len(size) == 2 and isinstance(size[0], (list, tuple)):
            h, w = _int_range(rng, size[0]), _int_range(rng, size[1])
        else:
            h = w = _int_range(rng, size)
        h, w = min(h, H), min(w, W)
        r = int(rng.integers(0, H - h + 1))
        c = int(rng.integers(0, W - w + 1))
        img[r:r + h, c:c + w] = fill
    return img


def gaussian_blur(img, rng, sigma=1.0):
    s = _uniform(rng, sigma)
    if s <= 0:
        return img
    spatial = (s, s, 0) if img.ndim == 3 else (s, s)
    return gaussian_filter(img, sigma=spatial, mode="nearest", truncate=BLUR_TRUNCATE)


def _channel_values(rng, value, img, per_channel):
    if per_channel and img.ndim == 3:
        return np.array([_uniform(rng, value) for _ in range(img.shape[2])])
    return _uniform(rng, value)


def add(img, rng, value=0.0, per_channel=False):
    return img + _channel_values(rng, value, img, per_channel)


def multiply(img, rng, value=1.0, per_channel=False):
    return img * _channel_values(rng, value, img, per_channel)


def invert(img, rng):
    return 255.0 - img


def contrast(img, rng, alpha=1.0):
    """Scale deviations from mid-gray (128) by ``alpha``."""
    return (img - 128.0) * _uniform(rng, alpha) + 128.0


OPS = {
    "coarse_dropout": coarse_dropout,
    "gaussian_blur": gaussian_blur,
    "add": add,
    "multiply": multiply,
    "invert": invert,
    "contrast": contrast,
}


def validate_pipeline(ops):
    for i, spec in enumerate(ops):
        if not isinstance(spec, dict) or spec.get("op") not in OPS:
            raise ValueError(f"pipeline[{i}]: unknown op {spec!r}")
        p = float(spec.get("p", 1.0))
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"pipeline[{i}]: probability {p} outside [0, 1]")
    return ops


def augment(img, ops, seed):
    """Apply ``ops`` in order; returns a new uint8 image of the same shape."""
    validate_pipeline(ops)
    rng = np.random.default_rng(seed)
    out = np.asarray(img, dtype=np.float64).copy()
    for spec in ops:
        params = {k: v for k, v in spec.items() if k not in ("op", "p")}
        if rng.random() < float(spec.get("p", 1.0)):
            out = OPS[spec["op"]](out, rng, **params)
            out = np.clip(out, 0.0, 255.0)
    return np.rint(out).astype(np.uint8)
