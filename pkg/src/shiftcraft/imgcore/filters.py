"""Linear filters: grayscale conversion, Gaussian blur and Sobel gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# reflect-101 ("d c b | a b c d | c b a"); scipy calls it "mirror"
_BORDER = "mirror"


class DimensionError(ValueError):
    """Raised when an image is too small or has an unsupported shape."""


def as_image(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise DimensionError(f"expected HxW or HxWx3 image, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError("empty image")
    return arr


def to_grayscale(img) -> np.ndarray:
    """Rec. 601 luma for color input; gray input is returned unchanged (as a copy)."""
    arr = as_image(img)
    if arr.ndim == 2:
        return arr.copy()
    return arr @ LUMA_WEIGHTS


def gaussian_kernel(sigma: float) -> np.ndarray:
    # sigma 1.0 uses the 5-tap kernel of the reference pipeline
    radius = 2 if sigma == 1.0 else int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflect-101 borders. ``sigma == 0`` is the identity."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    arr = np.asarray(img, dtype=np.float64)
    if sigma == 0:
        return arr.copy()
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(arr, k, axis=0, mode=_BORDER)
    return ndimage.correlate1d(out, k, axis=1, mode=_BORDER)


@dataclass(frozen=True)
class GradientField:
    magnitude: np.ndarray
    orientation: np.ndarray  # radians in [0, pi), 0 where magnitude == 0


_SMOOTH = np.array([1.0, 2.0, 1.0])
_DERIV = np.array([-1.0, 0.0, 1.0])


def sobel_gradients(img) -> GradientField:
    """3x3 Sobel gradients. x runs along columns, y along rows (downwards)."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"sobel_gradients needs a 2-D gray image, got shape {arr.shape}")
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise DimensionError(f"image must be at least 3x3, got {arr.shape[0]}x{arr.shape[1]}")
    gx = ndimage.correlate1d(ndimage.correlate1d(arr, _SMOOTH, axis=0, mode=_BORDER), _DERIV, axis=1, mode=_BORDER)
    gy = ndimage.correlate1d(ndimage.correlate1d(arr, _SMOOTH, axis=1, mode=_BORDER), _DERIV, axis=0, mode=_BORDER)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)
    theta = np.where(theta < 0, theta + np.pi, theta)
    theta[(theta >= np.pi) | (mag == 0)] = 0.0
    return GradientField(mag, theta)
