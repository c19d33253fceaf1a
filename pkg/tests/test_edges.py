import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from shiftcraft.imgcore import (
    GradientField,
    hysteresis,
    label_components,
    nonmax_suppress,
    quantize_orientation,
    remove_small_components,
    sobel_gradients,
)
from shiftcraft.imgcore import _backend

EIGHT = np.ones((3, 3), dtype=bool)
OFFSETS = {0: ((0, 1), (0, -1)), 1: ((1, 1), (-1, -1)), 2: ((1, 0), (-1, 0)), 3: ((1, -1), (-1, 1))}

shapes = st.tuples(st.integers(1, 14), st.integers(1, 14))
mags = arrays(np.float64, shapes, elements=st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]))
bitmaps = arrays(np.bool_, st.tuples(st.integers(1, 16), st.integers(1, 16)))


def brute_nms(mag, bins):
    out = np.zeros_like(mag)
    h, w = mag.shape
    for r in range(h):
        for c in range(w):
            ok = True
            for dr, dc in OFFSETS[int(bins[r, c])]:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and mag[rr, cc] > mag[r, c]:
                    ok = False
            out[r, c] = mag[r, c] if ok else 0.0
    return out


def brute_flood(mask, seeds):
    """Breadth-first 8-connected flood from ``seeds`` within ``mask``."""
    on = np.zeros_like(mask, dtype=bool)
    stack = [tuple(p) for p in np.argwhere(seeds & mask)]
    h, w = mask.shape
    while stack:
        r, c = stack.pop()
        if on[r, c]:
            continue
        on[r, c] = True
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] and not on[rr, cc]:
                    stack.append((rr, cc))
    return on


def _field(mag, theta=None):
    return GradientField(mag, np.zeros_like(mag) if theta is None else theta)


def test_default_backend_reported():
    assert _backend.BACKEND in ("cython", "python")


class TestQuantize:
    @pytest.mark.parametrize("deg,expected", [(0, 0), (22.4, 0), (22.6, 1), (45, 1), (90, 2), (135, 3), (157.4, 3), (157.6, 0), (179.9, 0)])
    def test_bins(self, deg, expected):
        assert quantize_orientation(np.array([np.deg2rad(deg)]))[0] == expected


class TestNms:
    def test_zero(self, kernels):
        assert not np.any(nonmax_suppress(_field(np.zeros((5, 5))), kernels))

    def test_isolated_pixel_kept(self, kernels):
        mag = np.zeros((5, 5))
        mag[2, 2] = 0.7
        for theta in (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4):
            out = nonmax_suppress(_field(mag, np.full((5, 5), theta)), kernels)
            assert out[2, 2] == 0.7 and np.count_nonzero(out) == 1

    def test_step_edge_ridge(self, kernels):
        img = np.zeros((10, 10))
        img[:, 5:] = 1.0
        out = nonmax_suppress(sobel_gradients(img), kernels)
        for row in out:
            nz = np.flatnonzero(row)
            assert len(nz[nz < 5]) <= 1 and len(nz[nz >= 5]) <= 1

    @settings(max_examples=60, deadline=None)
    @given(mags, st.data())
    def test_matches_brute_force(self, mag, data):
        bins = data.draw(arrays(np.uint8, mag.shape, elements=st.integers(0, 3)))
        theta = bins * (np.pi / 4)
        for k in (_backend.python_kernels, _backend.kernels):
            out = nonmax_suppress(_field(mag, theta), k)
            np.testing.assert_array_equal(out, brute_nms(mag, bins))

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(3, 12)), elements=st.floats(0, 1)))
    def test_subset_of_support(self, img):
        g = sobel_gradients(img)
        out = nonmax_suppress(g)
        assert np.all((out == 0) | (out == g.magnitude))


class TestHysteresis:
    def test_row_example(self, kernels):
        row = np.array([[0.9, 0.4, 0.4, 0.4, 0.1]])
        assert hysteresis(row, 0.3, 0.8, kernels).tolist() == [[True, True, True, True, False]]

    def test_all_below_low(self, kernels):
        assert not hysteresis(np.full((4, 4), 0.1), 0.2, 0.5, kernels).any()

    def test_low_equals_high_is_threshold(self, kernels, rng):
        mag = rng.random((9, 9))
        np.testing.assert_array_equal(hysteresis(mag, 0.5, 0.5, kernels), mag >= 0.5)

    def test_diagonal_link(self, kernels):
        mag = np.zeros((4, 4))
        mag[0, 0], mag[1, 1], mag[2, 2] = 1.0, 0.5, 0.5
        assert hysteresis(mag, 0.4, 0.9, kernels).sum() == 3

    def test_low_above_high(self):
        with pytest.raises(ValueError):
            hysteresis(np.zeros((3, 3)), 0.6, 0.5)

    @settings(max_examples=60, deadline=None)
    @given(mags, st.floats(0, 1), st.floats(0, 1))
    def test_matches_flood_fill(self, mag, a, b):
        low, high = min(a, b), max(a, b)
        expected = brute_flood(mag >= low, mag >= high)
        for k in (_backend.python_kernels, _backend.kernels):
            np.testing.assert_array_equal(hysteresis(mag, low, high, k), expected)


class TestLabeling:
    @settings(max_examples=80, deadline=None)
    @given(bitmaps)
    def test_matches_scipy(self, bits):
        ref, n_ref = ndimage.label(bits, structure=EIGHT)
        for k in (_backend.python_kernels, _backend.kernels):
            labels, n = label_components(bits, k)
            assert n == n_ref
            # both number components by first pixel in raster order
            np.testing.assert_array_equal(labels, ref)

    def test_empty(self, kernels):
        labels, n = label_components(np.zeros((3, 4), bool), kernels)
        assert n == 0 and not labels.any()


class TestRemoveSmall:
    def test_example_3_and_12(self, kernels):
        bits = np.zeros((10, 10), bool)
        bits[0, 0:3] = True
        bits[5:8, 4:8] = True
        out = remove_small_components(bits, 10, kernels)
        assert out.sum() == 12 and not out[0].any()

    def test_min_area_zero_identity(self, kernels, rng):
        bits = rng.random((8, 8)) > 0.5
        np.testing.assert_array_equal(remove_small_components(bits, 0, kernels), bits)

    def test_empty(self, kernels):
        assert not remove_small_components(np.zeros((5, 5), bool), 3, kernels).any()

    def test_diagonal_pixels_are_one_component(self, kernels):
        bits = np.eye(4, dtype=bool)
        np.testing.assert_array_equal(remove_small_components(bits, 4, kernels), bits)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            remove_small_components(np.zeros((2, 2), bool), -1)

    @settings(max_examples=60, deadline=None)
    @given(bitmaps, st.integers(0, 12))
    def test_idempotent_and_matches_oracle(self, bits, min_area):
        once = remove_small_components(bits, min_area)
        np.testing.assert_array_equal(remove_small_components(once, min_area), once)
        ref, n = ndimage.label(bits, structure=EIGHT)
        sizes = np.bincount(ref.ravel(), minlength=n + 1)
        expected = (sizes >= min_area)[ref] & bits
        np.testing.assert_array_equal(once, expected)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 20), st.integers(3, 20)), elements=st.floats(0, 1)), st.floats(0, 0.5), st.floats(0.5, 1))
def test_backends_bit_identical(img, low, high):
    g = sobel_gradients(img)
    py, cy = _backend.python_kernels, _backend.kernels
    thin_py, thin_cy = nonmax_suppress(g, py), nonmax_suppress(g, cy)
    np.testing.assert_array_equal(thin_py, thin_cy)
    m = thin_py / max(thin_py.max(), 1e-12)
    np.testing.assert_array_equal(hysteresis(m, low, high, py), hysteresis(m, low, high, cy))
    bits = m > low
    np.testing.assert_array_equal(label_components(bits, py)[0], label_components(bits, cy)[0])
