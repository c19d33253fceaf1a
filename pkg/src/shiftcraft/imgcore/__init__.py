"""Deterministic image-processing kernels."""

from ._backend import BACKEND
from .edges import hysteresis, label_components, nonmax_suppress, quantize_orientation, remove_small_components
from .filters import DimensionError, GradientField, as_image, gaussian_blur, gaussian_kernel, sobel_gradients, to_grayscale
from .threshold import ThresholdMethod, compute_threshold, histogram, otsu_cut

__all__ = [
    "BACKEND",
    "DimensionError",
    "GradientField",
    "ThresholdMethod",
    "as_image",
    "compute_threshold",
    "gaussian_blur",
    "gaussian_kernel",
    "histogram",
    "hysteresis",
    "label_components",
    "nonmax_suppress",
    "otsu_cut",
    "quantize_orientation",
    "remove_small_components",
    "sobel_gradients",
    "to_grayscale",
]
