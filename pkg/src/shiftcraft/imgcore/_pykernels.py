"""Pure-Python (numpy) versions of the per-pixel kernels in _ckernels.pyx."""

from __future__ import annotations

import numpy as np

# neighbor offsets (dr, dc) for the four quantized gradient directions
_OFFSETS = (
    ((0, 1), (0, -1)),
    ((1, 1), (-1, -1)),
    ((1, 0), (-1, 0)),
    ((1, -1), (-1, 1)),
)


def _shifted(a: np.ndarray, dr: int, dc: int, fill) -> np.ndarray:
    """out[r, c] = a[r + dr, c + dc], ``fill`` where that index is out of bounds."""
    h, w = a.shape
    out = np.full_like(a, fill)
    out[max(0, -dr):h - max(0, dr), max(0, -dc):w - max(0, dc)] = a[max(0, dr):h - max(0, -dr), max(0, dc):w - max(0, -dc)]
    return out


def nms(mag: np.ndarray, bins: np.ndarray) -> np.ndarray:
    keep = mag > 0
    for b, pair in enumerate(_OFFSETS):
        sel = bins == b
        for dr, dc in pair:
            keep &= ~(sel & (_shifted(mag, dr, dc, -np.inf) > mag))
    return np.where(keep, mag, 0.0)


def _dilate8(bits: np.ndarray) -> np.ndarray:
    out = bits.copy()
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                out |= _shifted(bits, dr, dc, False)
    return out


def hysteresis(mag: np.ndarray, low: float, high: float) -> np.ndarray:
    candidate = mag >= low
    on = mag >= high
    while True:
        grown = _dilate8(on) & candidate
        if np.array_equal(grown, on):
            return on
        on = grown


def label8(bits: np.ndarray):
    """8-connected labels numbered 1..n in raster order of each component's first pixel."""
    bits = bits.astype(bool)
    h, w = bits.shape
    big = h * w
    lab = np.where(bits, np.arange(big).reshape(h, w), big)
    while True:
        best = lab
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr or dc:
                    best = np.minimum(best, _shifted(lab, dr, dc, big))
        best = np.where(bits, best, big)
        if np.array_equal(best, lab):
            break
        lab = best
    roots = np.unique(lab[bits])
    out = np.zeros((h, w), dtype=np.int32)
    out[bits] = (np.searchsorted(roots, lab[bits]) + 1).astype(np.int32)
    return out, int(roots.size)
