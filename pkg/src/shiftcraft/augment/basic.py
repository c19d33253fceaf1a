"""Basic augmentations: random resized crop and horizontal flip."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import as_rng


@dataclass(frozen=True)
class BasicAugConfig:
    crop_scale: tuple[float, float] = (0.8, 1.0)
    aspect: tuple[float, float] = (3 / 4, 4 / 3)
    out_size: int = 224
    hflip_prob: float = 0.5

    def __post_init__(self):
        lo, hi = self.crop_scale
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"crop_scale must satisfy 0 < min <= max <= 1, got {self.crop_scale}")
        if not 0 < self.aspect[0] <= self.aspect[1]:
            raise ValueError(f"invalid aspect interval {self.aspect}")
        if not 0 <= self.hflip_prob <= 1:
            raise ValueError("hflip_prob must be in [0, 1]")
        if self.out_size < 1:
            raise ValueError("out_size must be positive")

    @classmethod
    def digits(cls, out_size: int = 32) -> "BasicAugConfig":
        """Small glyph/digit data: 32 px output, no flipping."""
        return cls(out_size=out_size, hflip_prob=0.0)


def resize_bilinear(img, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment; same-size input is copied unchanged."""
    arr = np.asarray(img, dtype=np.float64)
    h, w = arr.shape[:2]
    if (h, w) == (out_h, out_w):
        return arr.copy()
    ys = np.clip((np.arange(out_h) + 0.5) * h / out_h - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * w / out_w - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    if arr.ndim == 3:
        wy, wx = wy[..., None], wx[..., None]
    top = arr[y0][:, x0] * (1 - wx) + arr[y0][:, x1] * wx
    bot = arr[y1][:, x0] * (1 - wx) + arr[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def sample_crop(h: int, w: int, cfg: BasicAugConfig, rng) -> tuple[int, int, int, int]:
    """(top, left, height, width) of a random crop; center crop after 10 failed tries."""
    area = h * w
    for _ in range(10):
        frac = rng.uniform(*cfg.crop_scale)
        ratio = rng.uniform(*cfg.aspect)
        cw = int(round(math.sqrt(frac * area * ratio)))
        ch = int(round(math.sqrt(frac * area / ratio)))
        if 0 < cw <= w and 0 < ch <= h:
            top = int(rng.integers(0, h - ch + 1))
            left = int(rng.integers(0, w - cw + 1))
            return top, left, ch, cw
    side = min(h, w)
    return (h - side) // 2, (w - side) // 2, side, side


def apply_basic(img, cfg: BasicAugConfig, rng=None) -> np.ndarray:
    rng = as_rng(rng)
    arr = np.asarray(img, dtype=np.float64)
    top, left, ch, cw = sample_crop(arr.shape[0], arr.shape[1], cfg, rng)
    out = resize_bilinear(arr[top:top + ch, left:left + cw], cfg.out_size, cfg.out_size)
    if rng.random() < cfg.hflip_prob:
        out = out[:, ::-1].copy()
    return out


def preprocess_eval(img, out_size: int) -> np.ndarray:
    """Deterministic test-time preprocessing: resize only."""
    return resize_bilinear(img, out_size, out_size)
