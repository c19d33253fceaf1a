"""Procedural single-source dataset with controllable target-domain shifts.

Each class is a glyph (disk, square, triangle, ...) drawn in a luminance
contrast against the background. On top sits a class-specific striped
color texture whose chroma is orthogonal to the luma axis, so it is an easy,
spurious cue for a raw-pixel classifier but invisible to grayscale edge
extraction. Pixel values are stored on the 8-bit grid k/255.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .imgcore import gaussian_blur, sobel_gradients, to_grayscale
from .imgcore.filters import LUMA_WEIGHTS
from .rng import derive_rng
from .valset import LabeledImage

SHIFTS = ("identity", "invert", "heavy_noise", "edge_only", "color_jitter", "blur_shift")

# shift magnitudes and rendering constants
HEAVY_NOISE_STD = 0.2
BLUR_SHIFT_SIGMA = 1.5
# edge_only: normalized magnitudes below this are rendered black (8-bit rounding
# of the luma-neutral texture leaves a faint gradient floor otherwise)
EDGE_ONLY_FLOOR = 0.01
JITTER_HUE_DEGREES = (90.0, 270.0)
JITTER_SATURATION = (0.6, 1.6)
BACKGROUND_LUMA = (0.62, 0.82)
GLYPH_LUMA = (0.18, 0.38)
TEXTURE_AMPLITUDE = 0.22
GLYPH_SCALE = (0.55, 0.75)
GLYPH_SHIFT = 0.08
GLYPH_ROTATION_DEG = 10.0
SUPERSAMPLE = 4

GLYPHS = ("disk", "square", "triangle", "plus", "ring", "diamond", "x_cross", "bars", "tee", "crescent")


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    class_count: int = 7
    image_size: int = 32
    per_class_train: int = 50
    per_class_val: int = 20
    per_class_test: int = 20
    texture_strength: float = 0.8
    shift: str = "identity"
    seed: int = 0
    texture_seed: int | None = None

    def __post_init__(self):
        if not 2 <= self.class_count <= len(GLYPHS):
            raise SynthError(f"class_count must be in [2, {len(GLYPHS)}]")
        if min(self.per_class_train, self.per_class_val, self.per_class_test) <= 0:
            raise SynthError("per-class counts must be positive")
        if not 0.0 <= self.texture_strength <= 1.0:
            raise SynthError("texture_strength must be in [0, 1]")
        if self.image_size < 8:
            raise SynthError("image_size must be at least 8")
        if self.shift not in SHIFTS:
            raise SynthError(f"unknown shift {self.shift!r}; expected one of {SHIFTS}")


def _glyph_mask(name: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inside-test on normalized coordinates (glyph spans roughly [-1, 1])."""
    au, av = np.abs(u), np.abs(v)
    r = np.hypot(u, v)
    if name == "disk":
        return r <= 0.9
    if name == "square":
        return np.maximum(au, av) <= 0.75
    if name == "triangle":
        return (v <= 0.7) & (v >= -0.9 + 2.0 * au * 0.9)
    if name == "plus":
        return ((au <= 0.28) & (av <= 0.95)) | ((av <= 0.28) & (au <= 0.95))
    if name == "ring":
        return (r <= 0.95) & (r >= 0.55)
    if name == "diamond":
        return au + av <= 0.95
    if name == "x_cross":
        return (np.abs(u - v) <= 0.36) & (np.abs(u + v) <= 1.7) | (np.abs(u + v) <= 0.36) & (np.abs(u - v) <= 1.7)
    if name == "bars":
        return (au <= 0.9) & ((np.abs(v - 0.5) <= 0.22) | (np.abs(v + 0.5) <= 0.22))
    if name == "tee":
        return ((av + 0.65 <= 0.3) | (v <= -0.35) & (v >= -0.95)) & (au <= 0.9) & (v <= -0.35) | (au <= 0.25) & (v >= -0.95) & (v <= 0.9)
    if name == "crescent":
        return (r <= 0.9) & (np.hypot(u - 0.45, v) > 0.7)
    raise SynthError(f"unknown glyph {name!r}")


def _chroma_basis() -> tuple[np.ndarray, np.ndarray]:
    w = LUMA_WEIGHTS / np.linalg.norm(LUMA_WEIGHTS)
    e1 = np.array([1.0, 0.0, 0.0]) - w[0] * w
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(w, e1)
    # rescale so that adding them leaves weighted luma unchanged exactly
    return e1 - (LUMA_WEIGHTS @ e1) / (LUMA_WEIGHTS @ LUMA_WEIGHTS) * LUMA_WEIGHTS, e2 - (LUMA_WEIGHTS @ e2) / (LUMA_WEIGHTS @ LUMA_WEIGHTS) * LUMA_WEIGHTS


_E1, _E2 = _chroma_basis()


def quantize(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img * 255.0), 0, 255) / 255.0


def render(label: int, spec: SynthSpec, shape_rng, texture_rng) -> np.ndarray:
    """One glyph image of class ``label`` (before any target shift)."""
    n = spec.image_size
    ss = n * SUPERSAMPLE
    scale = shape_rng.uniform(*GLYPH_SCALE)
    dx, dy = shape_rng.uniform(-GLYPH_SHIFT, GLYPH_SHIFT, 2)
    rot = np.deg2rad(shape_rng.uniform(-GLYPH_ROTATION_DEG, GLYPH_ROTATION_DEG))
    lb = shape_rng.uniform(*BACKGROUND_LUMA)
    lg = shape_rng.uniform(*GLYPH_LUMA)
    coords = (np.arange(ss) + 0.5) / ss * 2.0 - 1.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    x0, y0 = (xx - dx) / scale, (yy - dy) / scale
    u = np.cos(rot) * x0 + np.sin(rot) * y0
    v = -np.sin(rot) * x0 + np.cos(rot) * y0
    mask = _glyph_mask(GLYPHS[label], u, v).astype(np.float64)
    cover = mask.reshape(n, SUPERSAMPLE, n, SUPERSAMPLE).mean(axis=(1, 3))
    luma = lb + (lg - lb) * cover

    hue = 2.0 * np.pi * label / spec.class_count
    chroma = np.cos(hue) * _E1 + np.sin(hue) * _E2
    chroma /= np.abs(chroma).max()
    stripe_angle = np.pi * label / spec.class_count
    period = 3.0 + (label % 3)
    phase = texture_rng.uniform(0, 2 * np.pi)
    r, c = np.mgrid[0:n, 0:n].astype(np.float64)
    stripes = 0.5 + 0.5 * np.sin(2 * np.pi * (c * np.cos(stripe_angle) + r * np.sin(stripe_angle)) / period + phase)
    amp = spec.texture_strength * TEXTURE_AMPLITUDE
    img = luma[:, :, None] + amp * (0.4 + 0.6 * stripes)[:, :, None] * chroma
    return quantize(np.clip(img, 0.0, 1.0))


def apply_shift(img: np.ndarray, shift: str, rng) -> np.ndarray:
    """Apply a named domain shift; results stay on the 8-bit grid."""
    if shift == "identity":
        return img.copy()
    if shift == "invert":
        codes = np.rint(img * 255.0)
        return (255.0 - codes) / 255.0
    if shift == "heavy_noise":
        return quantize(np.clip(img + HEAVY_NOISE_STD * rng.standard_normal(img.shape), 0, 1))
    if shift == "edge_only":
        mag = sobel_gradients(to_grayscale(img)).magnitude
        edges = mag / mag.max() if mag.max() > 0 else mag
        edges = np.where(edges < EDGE_ONLY_FLOOR, 0.0, edges)
        return quantize(np.repeat(edges[:, :, None], 3, axis=2))
    if shift == "color_jitter":
        from .augment.transforms import hue_shift, saturation

        out = hue_shift(img, rng, degrees=rng.uniform(*JITTER_HUE_DEGREES))
        out = saturation(np.clip(out, 0, 1), rng, factor=rng.uniform(*JITTER_SATURATION))
        return quantize(np.clip(out, 0, 1))
    if shift == "blur_shift":
        return quantize(np.stack([gaussian_blur(img[:, :, k], BLUR_SHIFT_SIGMA) for k in range(img.shape[2])], axis=2))
    raise SynthError(f"unknown shift {shift!r}; expected one of {SHIFTS}")


def _sample(spec: SynthSpec, split: str, per_class: int) -> list[LabeledImage]:
    tseed = spec.seed if spec.texture_seed is None else spec.texture_seed
    out = []
    for label in range(spec.class_count):
        for k in range(per_class):
            shape_rng = derive_rng(spec.seed, "synth", split, label, k)
            texture_rng = derive_rng(tseed, "synth-texture", split, label, k)
            out.append(LabeledImage(render(label, spec, shape_rng, texture_rng), label, f"{split}-{label}-{k:05d}"))
    return out


def generate_source(spec: SynthSpec) -> tuple[list[LabeledImage], list[LabeledImage]]:
    """(train, val) source-domain splits."""
    return _sample(spec, "train", spec.per_class_train), _sample(spec, "val", spec.per_class_val)


def generate_target(spec: SynthSpec, shift: str | None = None) -> list[LabeledImage]:
    """Fresh glyph instances with ``shift`` applied (defaults to ``spec.shift``).

    Instances are shared across shifts for the same spec, so two targets
    differ only by their shift.
    """
    shift = spec.shift if shift is None else shift
    if shift not in SHIFTS:
        raise SynthError(f"unknown shift {shift!r}; expected one of {SHIFTS}")
    base = _sample(spec, "test", spec.per_class_test)
    return [
        LabeledImage(apply_shift(it.image, shift, derive_rng(spec.seed, "synth-shift", shift, it.id)), it.label, f"{shift}-{it.id}")
        for it in base
    ]


def with_shift(spec: SynthSpec, shift: str) -> SynthSpec:
    return replace(spec, shift=shift)
