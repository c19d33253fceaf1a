"""Rank correlation."""

from __future__ import annotations

import numpy as np


class UndefinedCorrelationError(ValueError):
    pass


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    ranks = np.empty(x.size, dtype=np.float64)
    start = 0
    for end in range(1, x.size + 1):
        if end == x.size or sx[end] != sx[start]:
            ranks[order[start:end]] = 0.5 * (start + end - 1) + 1.0
            start = end
    return ranks


def spearman(x, y) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("spearman needs at least two points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("correlation is undefined for constant input")
    rx = average_ranks(x) - (x.size + 1) / 2.0
    ry = average_ranks(y) - (y.size + 1) / 2.0
    rho = float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))
    return min(1.0, max(-1.0, rho))
