"""Binary thin edges (BTE): a binarized, thinned, pruned Sobel edge map.

Pipeline: grayscale -> Gaussian blur -> Sobel -> threshold t on the
(max-normalized) magnitude -> non-maximum suppression -> hysteresis with
bounds (0.5 t, 1.5 t) -> removal of small 8-connected components.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .imgcore import (
    ThresholdMethod,
    compute_threshold,
    gaussian_blur,
    hysteresis,
    nonmax_suppress,
    remove_small_components,
    sobel_gradients,
    to_grayscale,
)
from .rng import as_rng


@dataclass(frozen=True)
class BteParams:
    sigma: float = 1.0
    method: ThresholdMethod = ThresholdMethod.OTSU
    threshold_noise: float = 1.0
    bound_noise_low: float = 1.0
    bound_noise_high: float = 1.0
    min_area_fraction: float = 2e-4

    def __post_init__(self):
        object.__setattr__(self, "method", ThresholdMethod(self.method))
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if min(self.threshold_noise, self.bound_noise_low, self.bound_noise_high) <= 0:
            raise ValueError("noise factors must be > 0")
        if not 0.0 <= self.min_area_fraction < 1.0:
            raise ValueError("min_area_fraction must be in [0, 1)")

    def provenance(self) -> dict:
        return {
            "sigma": self.sigma,
            "method": self.method.value,
            "threshold_noise": self.threshold_noise,
            "bound_noise_low": self.bound_noise_low,
            "bound_noise_high": self.bound_noise_high,
            "min_area_fraction": self.min_area_fraction,
        }


DEFAULT_PARAMS = BteParams()


@dataclass(frozen=True)
class BteRandomPolicy:
    """Sampling ranges for the randomized training-time BTE."""

    sigma_choices: tuple[float, ...] = (0.0, 1.0, 2.0)
    method_choices: tuple[ThresholdMethod, ...] = (
        ThresholdMethod.YEN,
        ThresholdMethod.OTSU,
        ThresholdMethod.ISODATA,
        ThresholdMethod.LI,
        ThresholdMethod.MEAN,
    )
    threshold_noise_range: tuple[float, float] = (0.8, 1.2)
    bound_noise_range: tuple[float, float] = (0.9, 1.1)
    min_area_fraction: float = 2e-4

    def __post_init__(self):
        if not self.sigma_choices or not self.method_choices:
            raise ValueError("choice sets must be nonempty")
        for lo, hi in (self.threshold_noise_range, self.bound_noise_range):
            if not (0 < lo <= 1.0 <= hi):
                raise ValueError("noise ranges must be positive and contain 1.0")

    def sample(self, rng) -> BteParams:
        rng = as_rng(rng)
        sigma = self.sigma_choices[rng.integers(len(self.sigma_choices))]
        method = self.method_choices[rng.integers(len(self.method_choices))]
        tn = rng.uniform(*self.threshold_noise_range)
        bl = rng.uniform(*self.bound_noise_range)
        bh = rng.uniform(*self.bound_noise_range)
        return BteParams(float(sigma), method, float(tn), float(bl), float(bh), self.min_area_fraction)


DEFAULT_POLICY = BteRandomPolicy()


@dataclass
class BteTrace:
    """Intermediate maps from one pipeline run (for inspection and tests)."""

    magnitude: np.ndarray = field(repr=False)
    thinned: np.ndarray = field(repr=False)
    linked: np.ndarray = field(repr=False)
    threshold: float = 0.0
    low: float = 0.0
    high: float = 0.0
    min_area: int = 0


def extract_bte(img, params: BteParams = DEFAULT_PARAMS, trace: BteTrace | None = None) -> np.ndarray:
    """Run the BTE pipeline; returns a boolean HxW map."""
    gray = gaussian_blur(to_grayscale(img), params.sigma)
    grad = sobel_gradients(gray)
    peak = grad.magnitude.max()
    mag = grad.magnitude / peak if peak > 0 else grad.magnitude
    t = compute_threshold(mag, params.method) * params.threshold_noise
    thinned = nonmax_suppress(type(grad)(mag, grad.orientation))
    low = 0.5 * t * params.bound_noise_low
    high = 1.5 * t * params.bound_noise_high
    if low > high:
        low = high
    # zero-magnitude pixels are never edges, whatever the bounds
    linked = hysteresis(thinned, low, high) & (thinned > 0)
    min_area = int(round(params.min_area_fraction * gray.size))
    out = remove_small_components(linked, min_area)
    if trace is not None:
        trace.magnitude, trace.thinned, trace.linked = mag, thinned, linked
        trace.threshold, trace.low, trace.high, trace.min_area = t, low, high, min_area
    return out


def extract_bte_random(img, policy: BteRandomPolicy = DEFAULT_POLICY, rng=None, return_params: bool = False):
    """Randomized BTE: sigma, method and noise factors drawn from ``policy``."""
    params = policy.sample(as_rng(rng))
    out = extract_bte(img, params)
    return (out, params) if return_params else out


def sobel_edge_map(img, sigma: float = 1.0) -> np.ndarray:
    """Non-binarized ablation: blurred Sobel magnitude divided by its maximum."""
    mag = sobel_gradients(gaussian_blur(to_grayscale(img), sigma)).magnitude
    peak = mag.max()
    return mag / peak if peak > 0 else np.zeros_like(mag)


def encode_edges(edge_map, channels: int = 3) -> np.ndarray:
    """Edge map as a classifier input: on = 1.0, off = 0.0, replicated to ``channels``."""
    e = np.asarray(edge_map, dtype=np.float64)
    if channels == 1:
        return e
    return np.repeat(e[:, :, None], channels, axis=2)


def with_sigma(params: BteParams, sigma: float) -> BteParams:
    return replace(params, sigma=sigma)
