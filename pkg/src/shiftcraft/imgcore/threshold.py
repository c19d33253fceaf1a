"""Global histogram thresholds (Otsu, Yen, Li, Isodata, mean) on 256 bins over [0, 1]."""

from __future__ import annotations

from enum import Enum

import numpy as np

NBINS = 256
LEVELS = np.arange(NBINS, dtype=np.float64) / (NBINS - 1)


class ThresholdMethod(str, Enum):
    OTSU = "otsu"
    YEN = "yen"
    LI = "li"
    ISODATA = "isodata"
    MEAN = "mean"


def histogram_codes(img) -> np.ndarray:
    """Map intensities in [0, 1] to 8-bit codes 0..255 (nearest level)."""
    v = np.asarray(img, dtype=np.float64).ravel()
    return np.clip(np.rint(v * (NBINS - 1)), 0, NBINS - 1).astype(np.int64)


def histogram(img) -> np.ndarray:
    return np.bincount(histogram_codes(img), minlength=NBINS)


def otsu_cut(hist: np.ndarray) -> int:
    """Return the cut k (class 0 = codes <= k) maximizing between-class variance.

    Variance is evaluated as (n1*s0 - n0*s1)^2 / (n0*n1) from integer counts and
    code sums, so cuts that induce the same partition score identically.
    Near-maximal candidates are re-ranked in exact integer arithmetic, so
    float rounding cannot reorder close partitions. Ties resolve to the
    smallest k.
    """
    hist = np.asarray(hist, dtype=np.int64)
    codes = np.arange(hist.size, dtype=np.int64)
    n0 = np.cumsum(hist)[:-1]
    s0 = np.cumsum(hist * codes)[:-1]
    n1 = n0[-1] + hist[-1] - n0
    s1 = int((hist * codes).sum()) - s0
    num = (n1 * s0 - n0 * s1).astype(np.float64) ** 2
    den = (n0 * n1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        var = np.where(den > 0, num / den, 0.0)
    best = float(var.max())
    candidates = np.flatnonzero(var >= best * (1.0 - 1e-9))
    if candidates.size == 1:
        return int(candidates[0])

    def exact(k):
        a, b = int(n0[k]), int(n1[k])
        return (b * int(s0[k]) - a * int(s1[k])) ** 2, a * b

    top = int(candidates[0])
    top_num, top_den = exact(top)
    for k in candidates[1:]:
        k_num, k_den = exact(int(k))
        if k_num * top_den > top_num * k_den:
            top, top_num, top_den = int(k), k_num, k_den
    return top


def _yen(hist: np.ndarray) -> float:
    p = hist / hist.sum()
    p1 = np.cumsum(p)
    p1_sq = np.cumsum(p**2)
    p2_sq = np.cumsum((p**2)[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        crit = np.log(((p1_sq[:-1] * p2_sq[1:]) ** -1) * (p1[:-1] * (1.0 - p1[:-1])) ** 2)
    crit = np.where(np.isfinite(crit), crit, -np.inf)
    return float(LEVELS[int(np.argmax(crit))])


def _isodata(hist: np.ndarray) -> float:
    # Ridler-Calvard fixed point on the level grid: the first level t with
    # (mean of levels <= t + mean of levels > t) / 2 in [t, t + one bin)
    w = hist.astype(np.float64)
    n_low = np.cumsum(w)[:-1]
    n_high = w.sum() - n_low
    s_low = np.cumsum(w * LEVELS)[:-1]
    s_high = (w * LEVELS).sum() - s_low
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 0.5 * (s_low / n_low + s_high / n_high)
    step = 1.0 / (NBINS - 1)
    dist = mid - LEVELS[:-1]
    ok = np.flatnonzero((n_low > 0) & (n_high > 0) & (dist >= 0) & (dist < step))
    if ok.size:
        return float(LEVELS[ok[0]])
    return float((w * LEVELS).sum() / w.sum())


def _li(hist: np.ndarray) -> float:
    # minimum cross-entropy, iterative form; intensities shifted so the minimum is 0
    w = hist.astype(np.float64)
    occupied = np.flatnonzero(hist)
    vmin = LEVELS[occupied[0]]
    x = LEVELS - vmin
    tol = 0.5 / (NBINS - 1)
    t_next = float((w * x).sum() / w.sum())
    t_curr = -2.0 * tol
    for _ in range(1000):
        if abs(t_next - t_curr) <= tol:
            break
        t_curr = t_next
        fore = x > t_curr
        wf, wb = w[fore].sum(), w[~fore].sum()
        if wf == 0 or wb == 0:
            break
        mean_fore = (w[fore] * x[fore]).sum() / wf
        mean_back = (w[~fore] * x[~fore]).sum() / wb
        if mean_back == 0:
            break
        t_next = float((mean_back - mean_fore) / (np.log(mean_back) - np.log(mean_fore)))
    return t_next + vmin


def compute_threshold(img, method: ThresholdMethod | str = ThresholdMethod.OTSU) -> float:
    """Global threshold in [0, 1]; pixels strictly above it are foreground.

    A constant image returns its own value for every method.
    """
    method = ThresholdMethod(method)
    v = np.asarray(img, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot threshold an empty image")
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return lo
    if method is ThresholdMethod.MEAN:
        return float(v.mean())
    hist = histogram(v)
    if np.count_nonzero(hist) == 1:
        return float(LEVELS[np.flatnonzero(hist)[0]])
    if method is ThresholdMethod.OTSU:
        t = LEVELS[otsu_cut(hist)]
    elif method is ThresholdMethod.YEN:
        t = _yen(hist)
    elif method is ThresholdMethod.ISODATA:
        t = _isodata(hist)
    else:
        t = _li(hist)
    return float(min(max(t, 0.0), 1.0))
