import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from shiftcraft.imgcore import DimensionError, gaussian_blur, gaussian_kernel, sobel_gradients, to_grayscale
from shiftcraft.imgcore.filters import LUMA_WEIGHTS

images = arrays(np.float64, st.tuples(st.integers(3, 16), st.integers(3, 16)), elements=st.floats(0, 1))


class TestGrayscale:
    def test_white_is_one(self):
        np.testing.assert_allclose(to_grayscale(np.ones((4, 5, 3))), 1.0, atol=1e-15)

    def test_gray_passthrough(self, rng):
        g = rng.random((6, 7))
        np.testing.assert_array_equal(to_grayscale(g), g)

    def test_pure_red(self):
        img = np.zeros((3, 3, 3))
        img[..., 0] = 1.0
        np.testing.assert_allclose(to_grayscale(img), 0.299)

    def test_weights(self):
        assert LUMA_WEIGHTS == pytest.approx((0.299, 0.587, 0.114))


class TestGaussian:
    def test_sigma_one_is_five_taps(self):
        k = gaussian_kernel(1.0)
        assert k.size == 5
        assert k.sum() == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("sigma,radius", [(0.5, 2), (1.5, 5), (2.0, 6), (3.0, 9)])
    def test_other_sigmas_use_three_sigma_radius(self, sigma, radius):
        assert gaussian_kernel(sigma).size == 2 * radius + 1

    def test_sigma_zero_is_identity(self, rng):
        img = rng.random((9, 11))
        out = gaussian_blur(img, 0.0)
        assert out is not img
        np.testing.assert_array_equal(out, img)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_constant_preserved(self, sigma):
        out = gaussian_blur(np.full((12, 12), 0.37), sigma)
        np.testing.assert_allclose(out, 0.37, atol=1e-15)

    def test_impulse_center_matches_2d_kernel(self):
        img = np.zeros((9, 9))
        img[4, 4] = 1.0
        k = gaussian_kernel(1.0)
        k2 = np.outer(k, k)
        out = gaussian_blur(img, 1.0)
        assert out[4, 4] == pytest.approx(k2[2, 2], abs=1e-15)
        np.testing.assert_allclose(out[2:7, 2:7], k2, atol=1e-15)

    def test_reflect101_border(self, rng):
        img = rng.random((10, 10))
        k = gaussian_kernel(1.0)
        ref = ndimage.correlate(img, np.outer(k, k), mode="mirror")
        np.testing.assert_allclose(gaussian_blur(img, 1.0), ref, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(images, st.sampled_from([0.5, 1.0, 2.0]))
    def test_range_preserved(self, img, sigma):
        out = gaussian_blur(img, sigma)
        assert out.min() >= img.min() - 1e-9
        assert out.max() <= img.max() + 1e-9

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((4, 4)), -1.0)


class TestSobel:
    def test_constant_zero(self):
        g = sobel_gradients(np.full((8, 8), 0.4))
        assert np.all(g.magnitude == 0)
        assert np.all(g.orientation == 0)

    def test_vertical_step(self):
        img = np.zeros((8, 8))
        img[:, 4:] = 1.0
        g = sobel_gradients(img)
        col_max = g.magnitude.max(axis=0)
        assert set(np.flatnonzero(col_max == col_max.max())) == {3, 4}
        on = g.magnitude > 0
        np.testing.assert_allclose(g.orientation[on], 0.0, atol=1e-12)

    def test_matches_scipy_sobel(self, rng):
        img = rng.random((12, 9))
        gx = ndimage.sobel(img, axis=1, mode="mirror")
        gy = ndimage.sobel(img, axis=0, mode="mirror")
        np.testing.assert_allclose(sobel_gradients(img).magnitude, np.hypot(gx, gy), atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(images)
    def test_transpose_symmetry(self, img):
        g, gt = sobel_gradients(img), sobel_gradients(img.T)
        np.testing.assert_allclose(gt.magnitude, g.magnitude.T, atol=1e-12)
        on = g.magnitude.T > 1e-9
        expected = np.mod(np.pi / 2 - g.orientation.T, np.pi)
        diff = np.abs(gt.orientation - expected)[on]
        # angles live on a circle of period pi
        assert np.all(np.minimum(diff, np.pi - diff) < 1e-9)

    @settings(max_examples=40, deadline=None)
    @given(images)
    def test_field_invariants(self, img):
        g = sobel_gradients(img)
        assert np.all(g.magnitude >= 0)
        assert np.all((g.orientation >= 0) & (g.orientation < np.pi))

    @pytest.mark.parametrize("shape", [(2, 5), (5, 2), (1, 1)])
    def test_too_small(self, shape):
        with pytest.raises(DimensionError):
            sobel_gradients(np.zeros(shape))
