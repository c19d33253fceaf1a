"""Hyperparameter grids."""

from __future__ import annotations

import numpy as np

W_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def grid_lr(reduced: bool = False) -> np.ndarray:
    """33 log-equidistant learning rates in [1e-5, 1]; ``reduced`` keeps every 4th (9 values)."""
    i = np.arange(0, 33, 4 if reduced else 1)
    return 10.0 ** (-5.0 + 5.0 * i / 32.0)


def grid_lambda() -> np.ndarray:
    """17 equidistant loss weights in [0, 1]."""
    return np.arange(17) / 16.0


def grid_w() -> np.ndarray:
    return np.array(W_GRID)
