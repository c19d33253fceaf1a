"""The 10-group extra-augmentation taxonomy and its transform registry.

Parameter ranges (sampled uniformly per spec; ``int`` ranges inclusive):

=============== ======================= ==========================================
group           transform               parameters
=============== ======================= ==========================================
arithmetic      additive_gaussian_noise scale [0.03, 0.15]
arithmetic      salt_and_pepper         p [0.02, 0.10]
arithmetic      coarse_dropout          p [0.05, 0.20], size_frac [0.06, 0.15]
arithmetic      invert                  -
arithmetic      multiply                factor [0.5, 1.5]
arithmetic      solarize                threshold [0.5, 0.9]
artistic        cartoon                 sigma [0.5, 1.5], levels {4..8}
artistic        oil_paint               size 3, levels {4..8}
artistic        pencil_sketch           sigma [1.0, 3.0]
blur            gaussian_blur           sigma [0.8, 2.0]
blur            box_blur                radius {1, 2}
blur            median_blur             radius {1, 2}
blur            motion_blur             k {3..7}, angle [0, 180)
color           grayscale               alpha [0.7, 1.0]
color           hue_shift               degrees [45, 315]
color           saturation              factor [0.0, 2.5]
color           channel_shuffle         -
color           posterize               bits {2..4}
color           color_temperature       warmth [-0.3, 0.3]
contrast        gamma_contrast          gamma [0.4, 2.2]
contrast        linear_contrast         alpha [0.4, 1.8]
contrast        sigmoid_contrast        gain [5, 12], cutoff [0.35, 0.65]
contrast        histogram_equalize      -
contrast        autocontrast            cutoff [0.0, 0.05]
convolutional   sharpen                 alpha [0.3, 1.0], lightness [0.8, 1.5]
convolutional   emboss                  alpha [0.3, 1.0], strength [0.5, 1.5]
convolutional   edge_detect             alpha [0.3, 0.9]
convolutional   directional_edge        alpha [0.3, 0.9], direction [0, 360)
edges           canny_edges             alpha [0.6, 1.0], sigma [0.5, 2.0]
edges           sobel_edges             alpha [0.6, 1.0]
edges           edge_overlay            darkness [0.5, 1.0]
geometric       rotate                  degrees [-35, 35]
geometric       shear                   degrees [-25, 25]
geometric       scale_translate         scale [0.7, 1.3], shift [-0.12, 0.12]
geometric       elastic                 alpha [1.5, 4.0], sigma [3.0, 5.0]
geometric       perspective             jitter [0.04, 0.12]
segmentation    superpixels             n_segments {16..64}, p_replace [0.5, 1.0]
segmentation    voronoi                 n_points {20..80}
segmentation    regular_grid_voronoi    cells {4..10}, jitter [0.0, 0.4]
weather         fog                     density [0.3, 0.7], scale [3, 8]
weather         clouds                  density [0.2, 0.6], scale [2, 5]
weather         snowflakes              density [0.01, 0.05], length {1..3}
weather         rain                    density [0.01, 0.04], length {3..7}, angle [60, 120]
=============== ======================= ==========================================
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from ..rng import as_rng
from . import transforms as T


class AugmentationGroup(str, Enum):
    ARITHMETIC = "arithmetic"
    ARTISTIC = "artistic"
    BLUR = "blur"
    COLOR = "color"
    CONTRAST = "contrast"
    CONVOLUTIONAL = "convolutional"
    EDGES = "edges"
    GEOMETRIC = "geometric"
    SEGMENTATION = "segmentation"
    WEATHER = "weather"


ALL_GROUPS: tuple[AugmentationGroup, ...] = tuple(AugmentationGroup)


class RegistryError(KeyError):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "uniform" or "int"
    low: float
    high: float

    def sample(self, rng: np.random.Generator):
        if self.kind == "int":
            return int(rng.integers(int(self.low), int(self.high) + 1))
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class Template:
    group: AugmentationGroup
    name: str
    fn: Callable
    params: tuple[Param, ...] = ()


@dataclass(frozen=True)
class AugmentationSpec:
    """A concrete transform: template name plus sampled parameters."""

    group: AugmentationGroup
    name: str
    params: tuple[tuple[str, float], ...] = ()

    @property
    def kwargs(self) -> dict:
        return dict(self.params)

    def params_text(self) -> str:
        return ";".join(f"{k}={v!r}" for k, v in self.params)


def _u(name, lo, hi):
    return Param(name, "uniform", lo, hi)


def _i(name, lo, hi):
    return Param(name, "int", lo, hi)


G = AugmentationGroup
_TEMPLATES: tuple[Template, ...] = (
    Template(G.ARITHMETIC, "additive_gaussian_noise", T.additive_gaussian_noise, (_u("scale", 0.03, 0.15),)),
    Template(G.ARITHMETIC, "salt_and_pepper", T.salt_and_pepper, (_u("p", 0.02, 0.10),)),
    Template(G.ARITHMETIC, "coarse_dropout", T.coarse_dropout, (_u("p", 0.05, 0.20), _u("size_frac", 0.06, 0.15))),
    Template(G.ARITHMETIC, "invert", T.invert),
    Template(G.ARITHMETIC, "multiply", T.multiply, (_u("factor", 0.5, 1.5),)),
    Template(G.ARITHMETIC, "solarize", T.solarize, (_u("threshold", 0.5, 0.9),)),
    Template(G.ARTISTIC, "cartoon", T.cartoon, (_u("sigma", 0.5, 1.5), _i("levels", 4, 8))),
    Template(G.ARTISTIC, "oil_paint", T.oil_paint, (Param("size", "int", 3, 3), _i("levels", 4, 8))),
    Template(G.ARTISTIC, "pencil_sketch", T.pencil_sketch, (_u("sigma", 1.0, 3.0),)),
    Template(G.BLUR, "gaussian_blur", T.gaussian_blur_t, (_u("sigma", 0.8, 2.0),)),
    Template(G.BLUR, "box_blur", T.box_blur, (_i("radius", 1, 2),)),
    Template(G.BLUR, "median_blur", T.median_blur, (_i("radius", 1, 2),)),
    Template(G.BLUR, "motion_blur", T.motion_blur, (_i("k", 3, 7), _u("angle", 0.0, 180.0))),
    Template(G.COLOR, "grayscale", T.grayscale, (_u("alpha", 0.7, 1.0),)),
    Template(G.COLOR, "hue_shift", T.hue_shift, (_u("degrees", 45.0, 315.0),)),
    Template(G.COLOR, "saturation", T.saturation, (_u("factor", 0.0, 2.5),)),
    Template(G.COLOR, "channel_shuffle", T.channel_shuffle),
    Template(G.COLOR, "posterize", T.posterize, (_i("bits", 2, 4),)),
    Template(G.COLOR, "color_temperature", T.color_temperature, (_u("warmth", -0.3, 0.3),)),
    Template(G.CONTRAST, "gamma_contrast", T.gamma_contrast, (_u("gamma", 0.4, 2.2),)),
    Template(G.CONTRAST, "linear_contrast", T.linear_contrast, (_u("alpha", 0.4, 1.8),)),
    Template(G.CONTRAST, "sigmoid_contrast", T.sigmoid_contrast, (_u("gain", 5.0, 12.0), _u("cutoff", 0.35, 0.65))),
    Template(G.CONTRAST, "histogram_equalize", T.histogram_equalize),
    Template(G.CONTRAST, "autocontrast", T.autocontrast, (_u("cutoff", 0.0, 0.05),)),
    Template(G.CONVOLUTIONAL, "sharpen", T.sharpen, (_u("alpha", 0.3, 1.0), _u("lightness", 0.8, 1.5))),
    Template(G.CONVOLUTIONAL, "emboss", T.emboss, (_u("alpha", 0.3, 1.0), _u("strength", 0.5, 1.5))),
    Template(G.CONVOLUTIONAL, "edge_detect", T.edge_detect, (_u("alpha", 0.3, 0.9),)),
    Template(G.CONVOLUTIONAL, "directional_edge", T.directional_edge, (_u("alpha", 0.3, 0.9), _u("direction", 0.0, 360.0))),
    Template(G.EDGES, "canny_edges", T.canny_edges, (_u("alpha", 0.6, 1.0), _u("sigma", 0.5, 2.0))),
    Template(G.EDGES, "sobel_edges", T.sobel_edges, (_u("alpha", 0.6, 1.0),)),
    Template(G.EDGES, "edge_overlay", T.edge_overlay, (_u("darkness", 0.5, 1.0),)),
    Template(G.GEOMETRIC, "rotate", T.rotate, (_u("degrees", -35.0, 35.0),)),
    Template(G.GEOMETRIC, "shear", T.shear, (_u("degrees", -25.0, 25.0),)),
    Template(G.GEOMETRIC, "scale_translate", T.scale_translate, (_u("scale", 0.7, 1.3), _u("shift", -0.12, 0.12))),
    Template(G.GEOMETRIC, "elastic", T.elastic, (_u("alpha", 1.5, 4.0), _u("sigma", 3.0, 5.0))),
    Template(G.GEOMETRIC, "perspective", T.perspective, (_u("jitter", 0.04, 0.12),)),
    Template(G.SEGMENTATION, "superpixels", T.superpixels, (_i("n_segments", 16, 64), _u("p_replace", 0.5, 1.0))),
    Template(G.SEGMENTATION, "voronoi", T.voronoi, (_i("n_points", 20, 80),)),
    Template(G.SEGMENTATION, "regular_grid_voronoi", T.regular_grid_voronoi, (_i("cells", 4, 10), _u("jitter", 0.0, 0.4))),
    Template(G.WEATHER, "fog", T.fog, (_u("density", 0.3, 0.7), _u("scale", 3.0, 8.0))),
    Template(G.WEATHER, "clouds", T.clouds, (_u("density", 0.2, 0.6), _u("scale", 2.0, 5.0))),
    Template(G.WEATHER, "snowflakes", T.snowflakes, (_u("density", 0.01, 0.05), _i("length", 1, 3))),
    Template(G.WEATHER, "rain", T.rain, (_u("density", 0.01, 0.04), _i("length", 3, 7), _u("angle", 60.0, 120.0))),
)
_BY_NAME = {t.name: t for t in _TEMPLATES}


def registry() -> dict[AugmentationGroup, list[Template]]:
    """Templates by group, in canonical group order then listing order."""
    out: dict[AugmentationGroup, list[Template]] = {g: [] for g in ALL_GROUPS}
    for t in _TEMPLATES:
        out[t.group].append(t)
    return out


def template(name: str) -> Template:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise RegistryError(f"unknown augmentation {name!r}") from None


def parse_groups(groups) -> tuple[AugmentationGroup, ...]:
    """Normalize group names; 'all' expands to every group. Output is canonically ordered."""
    if isinstance(groups, str):
        groups = [g.strip() for g in groups.split(",") if g.strip()]
    names = set()
    for g in groups:
        if g == "all":
            names.update(ALL_GROUPS)
        else:
            try:
                names.add(AugmentationGroup(g))
            except ValueError:
                raise RegistryError(f"unknown augmentation group {g!r}") from None
    return tuple(g for g in ALL_GROUPS if g in names)


def sample_spec(group: AugmentationGroup, rng) -> AugmentationSpec:
    """Pick a transform uniformly within ``group`` and sample its parameters."""
    rng = as_rng(rng)
    group = AugmentationGroup(group)
    choices = registry()[group]
    t = choices[int(rng.integers(len(choices)))]
    return make_spec(t.name, **{p.name: p.sample(rng) for p in t.params})


def make_spec(name: str, **params) -> AugmentationSpec:
    t = template(name)
    defaults = {p.name for p in t.params}
    unknown = set(params) - defaults
    if unknown:
        raise RegistryError(f"{name} has no parameters {sorted(unknown)}")
    return AugmentationSpec(t.group, name, tuple((p.name, params[p.name]) for p in t.params if p.name in params))


def apply_extra(img, spec: AugmentationSpec, rng=None) -> np.ndarray:
    """Apply ``spec`` to ``img``; result clamped to [0, 1] with NaNs mapped to 0."""
    t = template(spec.name)
    if t.group != spec.group:
        raise RegistryError(f"{spec.name} is registered under {t.group.value}, not {spec.group}")
    arr = np.asarray(img, dtype=np.float64)
    out = t.fn(arr, as_rng(rng), **spec.kwargs)
    return np.clip(np.nan_to_num(out, nan=0.0, posinf=1.0, neginf=0.0), 0.0, 1.0)
