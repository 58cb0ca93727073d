import numpy as np
import pytest

from emdtex.exceptions import EmptySet, ShapeMismatch
from emdtex.spectral import SpectrumStats, color_to_scalar, mean_spectrum, spectral_difference
from oracles import naive_dft2


class TestMeanSpectrum:
    def test_single_image(self, rng):
        img = rng.random((8, 12))
        stats = mean_spectrum([img])
        assert stats.n_images == 1
        np.testing.assert_array_equal(stats.magnitude, np.abs(np.fft.fft2(img)))

    def test_cancelling_pair(self, rng):
        img = rng.random((8, 8))
        stats = mean_spectrum([img, -img])
        np.testing.assert_allclose(stats.magnitude, 0.0, atol=1e-12)

    @pytest.mark.parametrize("n", [8, 16])
    def test_matches_naive_dft(self, rng, n):
        images = [rng.random((n, n)) for _ in range(4)]
        expect = sum(naive_dft2(im) for im in images) / 4
        stats = mean_spectrum(images)
        np.testing.assert_allclose(stats.mean_spectrum, expect, rtol=0, atol=1e-9)
        np.testing.assert_allclose(stats.magnitude, np.abs(expect), rtol=0, atol=1e-9)

    def test_dc_term(self, rng):
        images = [rng.standard_normal((10, 6)) for _ in range(5)]
        stats = mean_spectrum(images)
        assert stats.magnitude[0, 0] == pytest.approx(abs(np.mean([im.sum() for im in images])), abs=1e-12)

    def test_order_independent(self, rng):
        images = [rng.random((16, 16)) for _ in range(9)]
        a = mean_spectrum(images).mean_spectrum
        b = mean_spectrum(images[::-1]).mean_spectrum
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_rgb_converted(self, rng):
        img = rng.random((8, 8, 3))
        np.testing.assert_array_equal(mean_spectrum([img]).magnitude, mean_spectrum([color_to_scalar(img)]).magnitude)

    def test_empty(self):
        with pytest.raises(EmptySet):
            mean_spectrum([])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mean_spectrum([np.zeros((4, 4)), np.zeros((4, 5))])
        with pytest.raises(ShapeMismatch):
            mean_spectrum([np.zeros((4, 4))], dims=(5, 5))


class TestSpectralDifference:
    def test_identical(self, rng):
        stats = mean_spectrum([rng.random((8, 8)) for _ in range(3)])
        assert spectral_difference(stats, stats) == 0.0

    def test_constant_offset(self, rng):
        mag = rng.random((16, 16)) * 50
        c = 1.75
        gen = SpectrumStats(mag + c, mag + c, 1)
        real = SpectrumStats(mag, mag, 1)
        assert spectral_difference(gen, real) == pytest.approx(c**2, abs=1e-9)

    def test_symmetric_non_negative(self, rng):
        a = mean_spectrum([rng.random((8, 8)) for _ in range(3)])
        b = mean_spectrum([rng.random((8, 8)) for _ in range(5)])
        assert spectral_difference(a, b) == spectral_difference(b, a) > 0

    def test_formula(self, rng):
        a, b = rng.random((2, 6, 5))
        expect = sum((a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(5)) / 30
        assert spectral_difference(a, b) == pytest.approx(expect, rel=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            spectral_difference(np.zeros((4, 4)), np.zeros((4, 3)))


class TestColorToScalar:
    def test_white(self):
        assert color_to_scalar(np.ones((1, 1, 3)))[0, 0] == pytest.approx(1.0, abs=1e-15)

    def test_red(self):
        assert color_to_scalar(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == 0.299

    def test_equal_channels(self, rng):
        g = rng.random((5, 5))
        np.testing.assert_allclose(color_to_scalar(np.stack([g, g, g], -1)), g, atol=1e-15)

    def test_bad_channels(self):
        with pytest.raises(ValueError):
            color_to_scalar(np.zeros((4, 4, 2)))
