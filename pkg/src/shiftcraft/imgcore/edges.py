"""Edge thinning and binary-map clean-up: NMS, hysteresis and component pruning."""

from __future__ import annotations

import numpy as np

from . import _backend
from .filters import GradientField


def quantize_orientation(theta: np.ndarray) -> np.ndarray:
    """Bin angles in [0, pi) to 0: 0deg, 1: 45deg, 2: 90deg, 3: 135deg."""
    return (np.floor((np.asarray(theta) + np.pi / 8) / (np.pi / 4)).astype(np.int64) % 4).astype(np.uint8)


def nonmax_suppress(grad: GradientField, kernels=None) -> np.ndarray:
    """Keep pixels whose magnitude is >= both neighbors along the quantized gradient.

    Out-of-bounds neighbors are ignored. Suppressed pixels are set to 0.
    """
    k = kernels or _backend.kernels
    mag = np.ascontiguousarray(grad.magnitude, dtype=np.float64)
    return k.nms(mag, np.ascontiguousarray(quantize_orientation(grad.orientation)))


def hysteresis(mag, low: float, high: float, kernels=None) -> np.ndarray:
    """Pixels >= high, plus pixels >= low 8-connected to them through such pixels."""
    if low > high:
        raise ValueError(f"hysteresis needs low <= high, got low={low}, high={high}")
    k = kernels or _backend.kernels
    return k.hysteresis(np.ascontiguousarray(mag, dtype=np.float64), float(low), float(high))


def label_components(bmap, kernels=None) -> tuple[np.ndarray, int]:
    """8-connected component labels 1..n (0 = background), numbered in raster order."""
    k = kernels or _backend.kernels
    return k.label8(np.ascontiguousarray(bmap, dtype=np.uint8))


def remove_small_components(bmap, min_area: int, kernels=None) -> np.ndarray:
    if min_area < 0:
        raise ValueError("min_area must be non-negative")
    bits = np.asarray(bmap, dtype=bool)
    if min_area <= 1 or not bits.any():
        return bits.copy()
    labels, n = label_components(bits, kernels)
    area = np.bincount(labels.ravel(), minlength=n + 1)
    keep = area >= min_area
    keep[0] = False
    return keep[labels]
