"""Image transforms backing the extra-augmentation registry.

Every function takes an HxW or HxWx3 float image in [0, 1], keyword
parameters, and a numpy Generator (used only by stochastic transforms),
and returns a new image of the same shape. Clamping to [0, 1] happens in
the registry wrapper.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..imgcore import gaussian_blur, sobel_gradients, to_grayscale
from ..imgcore.filters import LUMA_WEIGHTS

_MIRROR = "mirror"


def _per_channel(fn, img: np.ndarray) -> np.ndarray:
    if img.ndim == 2:
        return fn(img)
    return np.stack([fn(img[:, :, c]) for c in range(img.shape[2])], axis=2)


def _blend(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    return (1.0 - alpha) * a + alpha * b


def _like(gray: np.ndarray, img: np.ndarray) -> np.ndarray:
    """Broadcast a gray map to the channel layout of ``img``."""
    return gray if img.ndim == 2 else np.repeat(gray[:, :, None], img.shape[2], axis=2)


def _smooth_noise(rng, shape, scale: float) -> np.ndarray:
    """Low-frequency noise in [0, 1] with correlation length ~``scale`` pixels."""
    field = ndimage.gaussian_filter(rng.standard_normal(shape), max(scale, 0.5), mode="wrap")
    span = field.max() - field.min()
    return (field - field.min()) / span if span > 0 else np.zeros(shape)


# arithmetic


def additive_gaussian_noise(img, rng, scale=0.05):
    return img + scale * rng.standard_normal(img.shape) if scale > 0 else img.copy()


def salt_and_pepper(img, rng, p=0.05):
    out = img.copy()
    u = rng.random(img.shape[:2])
    out[u < p / 2] = 0.0
    out[(u >= p / 2) & (u < p)] = 1.0
    return out


def coarse_dropout(img, rng, p=0.05, size_frac=0.1):
    h, w = img.shape[:2]
    ch, cw = max(1, int(round(h * size_frac))), max(1, int(round(w * size_frac)))
    grid = rng.random((int(np.ceil(h / ch)), int(np.ceil(w / cw)))) < p
    mask = np.kron(grid, np.ones((ch, cw), dtype=bool))[:h, :w]
    out = img.copy()
    out[mask] = 0.0
    return out


def invert(img, rng):
    return 1.0 - img


def multiply(img, rng, factor=1.0):
    return img * factor


def solarize(img, rng, threshold=0.7):
    return np.where(img > threshold, 1.0 - img, img)


# artistic


def cartoon(img, rng, sigma=1.0, levels=6, edge_strength=0.8):
    smooth = _per_channel(lambda c: ndimage.median_filter(gaussian_blur(c, sigma), size=3, mode=_MIRROR), img)
    quant = np.round(smooth * (levels - 1)) / (levels - 1)
    mag = sobel_gradients(to_grayscale(smooth)).magnitude
    edges = np.clip(mag / (mag.max() + 1e-12) * 2.0, 0, 1)
    return quant * _like(1.0 - edge_strength * edges, img)


def oil_paint(img, rng, size=3, levels=8):
    med = _per_channel(lambda c: ndimage.median_filter(c, size=int(size), mode=_MIRROR), img)
    return np.round(med * (levels - 1)) / (levels - 1)


def pencil_sketch(img, rng, sigma=2.0):
    gray = to_grayscale(img)
    blurred_inv = gaussian_blur(1.0 - gray, sigma)
    sketch = np.clip(gray / np.maximum(1.0 - blurred_inv, 1e-3), 0, 1)
    return _like(sketch, img)


# blur


def gaussian_blur_t(img, rng, sigma=1.0):
    return _per_channel(lambda c: gaussian_blur(c, sigma), img)


def box_blur(img, rng, radius=1):
    return _per_channel(lambda c: ndimage.uniform_filter(c, size=2 * int(radius) + 1, mode=_MIRROR), img)


def median_blur(img, rng, radius=1):
    return _per_channel(lambda c: ndimage.median_filter(c, size=2 * int(radius) + 1, mode=_MIRROR), img)


def motion_blur(img, rng, k=5, angle=0.0):
    k = int(k)
    kern = np.zeros((k, k))
    c = (k - 1) / 2
    t = np.deg2rad(angle)
    for s in np.linspace(-c, c, 4 * k):
        kern[int(round(c + s * np.sin(t))), int(round(c + s * np.cos(t)))] = 1.0
    kern /= kern.sum()
    return _per_channel(lambda ch: ndimage.correlate(ch, kern, mode=_MIRROR), img)


# color


def grayscale(img, rng, alpha=1.0):
    if img.ndim == 2:
        return img.copy()
    return _blend(img, _like(to_grayscale(img), img), alpha)


def _rotation_about_gray(deg: float) -> np.ndarray:
    axis = np.ones(3) / np.sqrt(3.0)
    t = np.deg2rad(deg)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(t) * k + (1 - np.cos(t)) * (k @ k)


def hue_shift(img, rng, degrees=90.0):
    if img.ndim == 2:
        return img.copy()
    return img @ _rotation_about_gray(degrees).T


def saturation(img, rng, factor=1.0):
    if img.ndim == 2:
        return img.copy()
    return _blend(_like(to_grayscale(img), img), img, factor)


def channel_shuffle(img, rng):
    if img.ndim == 2:
        return img.copy()
    perm = rng.permutation(3)
    while np.array_equal(perm, np.arange(3)):
        perm = rng.permutation(3)
    return img[:, :, perm]


def posterize(img, rng, bits=3):
    levels = 2 ** int(bits)
    return np.floor(img * levels).clip(0, levels - 1) / (levels - 1)


def color_temperature(img, rng, warmth=0.2):
    if img.ndim == 2:
        return img.copy()
    return img * np.array([1.0 + warmth, 1.0, 1.0 - warmth])


# contrast


def gamma_contrast(img, rng, gamma=1.0):
    return np.clip(img, 0, 1) ** gamma


def linear_contrast(img, rng, alpha=1.0):
    return 0.5 + alpha * (img - 0.5)


def sigmoid_contrast(img, rng, gain=8.0, cutoff=0.5):
    return 1.0 / (1.0 + np.exp(gain * (cutoff - img)))


def histogram_equalize(img, rng):
    def eq(c):
        codes = np.clip(np.rint(c * 255), 0, 255).astype(np.int64)
        cdf = np.cumsum(np.bincount(codes.ravel(), minlength=256)).astype(np.float64)
        lo = cdf[cdf > 0][0]
        if cdf[-1] == lo:
            return c.copy()
        return ((cdf - lo) / (cdf[-1] - lo))[codes]

    return _per_channel(eq, img)


def autocontrast(img, rng, cutoff=0.02):
    def stretch(c):
        lo, hi = np.quantile(c, [cutoff, 1 - cutoff])
        return (c - lo) / (hi - lo) if hi > lo else c.copy()

    return _per_channel(stretch, img)


# convolutional


def _convolve(img, kern):
    return _per_channel(lambda c: ndimage.correlate(c, kern, mode=_MIRROR), img)


def sharpen(img, rng, alpha=0.5, lightness=1.0):
    kern = np.array([[-1, -1, -1], [-1, 8 + lightness, -1], [-1, -1, -1]], dtype=np.float64) / lightness
    return _blend(img, _convolve(img, kern), alpha)


def emboss(img, rng, alpha=0.5, strength=1.0):
    kern = np.array([[-1 - strength, 0 - strength, 0], [0 - strength, 1, 0 + strength], [0, 0 + strength, 1 + strength]])
    return _blend(img, _convolve(img, kern), alpha)


def edge_detect(img, rng, alpha=0.5):
    kern = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
    return _blend(img, np.abs(_convolve(img, kern)), alpha)


def directional_edge(img, rng, alpha=0.5, direction=0.0):
    t = np.deg2rad(direction)
    kern = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=np.float64)
    kern[1 + int(round(np.sin(t))), 1 + int(round(np.cos(t)))] -= 1.0
    return _blend(img, np.abs(_convolve(img, kern)) * 2.0, alpha)


# edges


def canny_edges(img, rng, alpha=1.0, sigma=1.0):
    from ..bte import BteParams, extract_bte

    edges = extract_bte(img, BteParams(sigma=sigma, min_area_fraction=0.0)).astype(np.float64)
    return _blend(img, _like(edges, img), alpha)


def sobel_edges(img, rng, alpha=1.0):
    mag = sobel_gradients(to_grayscale(img)).magnitude
    edges = mag / mag.max() if mag.max() > 0 else mag
    return _blend(img, _like(edges, img), alpha)


def edge_overlay(img, rng, darkness=0.8):
    mag = sobel_gradients(gaussian_blur(to_grayscale(img), 1.0)).magnitude
    edges = np.clip(mag / (mag.max() + 1e-12) * 2.0, 0, 1)
    return img * _like(1.0 - darkness * edges, img)


# geometric (reflection fill outside the source frame)


def _warp(img, rows, cols):
    coords = np.array([rows, cols])
    return _per_channel(lambda c: ndimage.map_coordinates(c, coords, order=1, mode=_MIRROR), img)


def _affine(img, matrix):
    h, w = img.shape[:2]
    cy, cx = (h - 1) / 2, (w - 1) / 2
    r, c = np.mgrid[0:h, 0:w].astype(np.float64)
    pts = np.stack([r.ravel() - cy, c.ravel() - cx])
    src = np.linalg.inv(matrix) @ pts
    return _warp(img, (src[0] + cy).reshape(h, w), (src[1] + cx).reshape(h, w))


def rotate(img, rng, degrees=0.0):
    t = np.deg2rad(degrees)
    return _affine(img, np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]))


def shear(img, rng, degrees=0.0):
    return _affine(img, np.array([[1.0, 0.0], [np.tan(np.deg2rad(degrees)), 1.0]]))


def scale_translate(img, rng, scale=1.0, shift=0.0):
    h, w = img.shape[:2]
    r, c = np.mgrid[0:h, 0:w].astype(np.float64)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    return _warp(img, (r - cy) / scale + cy - shift * h, (c - cx) / scale + cx - shift * w)


def elastic(img, rng, alpha=3.0, sigma=4.0):
    h, w = img.shape[:2]
    dr = ndimage.gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma) * alpha * sigma
    dc = ndimage.gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma) * alpha * sigma
    r, c = np.mgrid[0:h, 0:w].astype(np.float64)
    return _warp(img, r + dr, c + dc)


def perspective(img, rng, jitter=0.08):
    h, w = img.shape[:2]
    # bilinear interpolation of random corner displacements approximates a projective warp
    d = rng.uniform(-jitter, jitter, (4, 2)) * np.array([h, w])
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    a, b = v / max(h - 1, 1), u / max(w - 1, 1)
    wts = np.stack([(1 - a) * (1 - b), (1 - a) * b, a * (1 - b), a * b])
    return _warp(img, v + np.tensordot(d[:, 0], wts, 1), u + np.tensordot(d[:, 1], wts, 1))


# segmentation


def _region_mean(img, labels, n):
    counts = np.maximum(np.bincount(labels.ravel(), minlength=n), 1)

    def mean(c):
        return (np.bincount(labels.ravel(), weights=c.ravel(), minlength=n) / counts)[labels]

    return _per_channel(mean, img)


def superpixels(img, rng, n_segments=32, p_replace=1.0):
    h, w = img.shape[:2]
    side = max(1, int(round(np.sqrt(h * w / n_segments))))
    r, c = np.mgrid[0:h, 0:w]
    gw = int(np.ceil(w / side))
    labels = (r // side) * gw + (c // side)
    n = int(labels.max()) + 1
    replace = rng.random(n) < p_replace
    means = _region_mean(img, labels, n)
    mask = replace[labels]
    return np.where(_like(mask, img), means, img)


def voronoi(img, rng, n_points=40):
    h, w = img.shape[:2]
    pts = rng.uniform([0, 0], [h, w], (int(n_points), 2))
    r, c = np.mgrid[0:h, 0:w]
    d = (r[..., None] - pts[:, 0]) ** 2 + (c[..., None] - pts[:, 1]) ** 2
    labels = np.argmin(d, axis=2)
    return _region_mean(img, labels, int(n_points))


def regular_grid_voronoi(img, rng, cells=8, jitter=0.3):
    h, w = img.shape[:2]
    ys = (np.arange(cells) + 0.5) * h / cells
    xs = (np.arange(cells) + 0.5) * w / cells
    pts = np.array([(y, x) for y in ys for x in xs])
    pts += rng.uniform(-jitter, jitter, pts.shape) * np.array([h / cells, w / cells])
    r, c = np.mgrid[0:h, 0:w]
    d = (r[..., None] - pts[:, 0]) ** 2 + (c[..., None] - pts[:, 1]) ** 2
    return _region_mean(img, np.argmin(d, axis=2), len(pts))


# weather


def fog(img, rng, density=0.5, scale=6.0):
    field = _smooth_noise(rng, img.shape[:2], scale)
    alpha = density * (0.5 + 0.5 * field)
    return _blend(img, _like(np.full(img.shape[:2], 0.85), img), _like(alpha, img))


def clouds(img, rng, density=0.4, scale=3.0):
    field = _smooth_noise(rng, img.shape[:2], scale) ** 2
    return _blend(img, _like(np.ones(img.shape[:2]), img), _like(density * field, img))


def snowflakes(img, rng, density=0.03, length=2):
    h, w = img.shape[:2]
    flakes = (rng.random((h, w)) < density).astype(np.float64)
    if length > 1:
        kern = np.eye(int(length)) / 1.0
        flakes = np.clip(ndimage.correlate(flakes, kern, mode="constant"), 0, 1)
    return np.maximum(img, _like(0.95 * flakes, img))


def rain(img, rng, density=0.02, length=5, angle=70.0):
    h, w = img.shape[:2]
    drops = (rng.random((h, w)) < density).astype(np.float64)
    k = int(length)
    kern = np.zeros((k, k))
    t = np.deg2rad(angle)
    c = (k - 1) / 2
    for s in np.linspace(-c, c, 3 * k):
        kern[int(round(c + s * np.sin(t))), int(round(c + s * np.cos(t)))] = 1.0
    streaks = np.clip(ndimage.correlate(drops, kern, mode="constant"), 0, 1)
    return _blend(img, _like(np.full((h, w), 0.8), img), _like(0.7 * streaks, img))


def luminance(img) -> np.ndarray:
    return img if img.ndim == 2 else img @ LUMA_WEIGHTS
