"""Geometric-mean combination of image and shape predictions."""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-12


def ensemble_predict(p_image, p_shape, w: float) -> np.ndarray:
    """Normalized p_image**w * p_shape**(1 - w), with probabilities floored at 1e-12.

    Works on single vectors or on (n, C) batches.
    """
    p_i = np.asarray(p_image, dtype=np.float64)
    p_s = np.asarray(p_shape, dtype=np.float64)
    if p_i.shape != p_s.shape:
        raise ValueError(f"prediction shapes differ: {p_i.shape} vs {p_s.shape}")
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must be in [0, 1], got {w}")
    log_score = w * np.log(np.maximum(p_i, PROB_FLOOR)) + (1.0 - w) * np.log(np.maximum(p_s, PROB_FLOOR))
    log_score -= log_score.max(axis=-1, keepdims=True)
    score = np.exp(log_score)
    return score / score.sum(axis=-1, keepdims=True)
