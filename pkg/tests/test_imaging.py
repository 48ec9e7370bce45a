import numpy as np
import pytest

from errors import DimensionMismatchError, EmptySequenceError, InvalidInputError
from imaging.core import (
    FrameSequence,
    equalize,
    gaussian_blur,
    gray_stack,
    histogram,
    to_gray,
    to_hsv_value_channel,
)


class TestConversions:
    def test_gray_of_neutral_colors_is_exact(self):
        frame = np.array([[[0, 0, 0], [255, 255, 255], [77, 77, 77]]], dtype=np.uint8)
        assert to_gray(frame).tolist() == [[0, 255, 77]]

    def test_gray_weights(self):
        frame = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255]]], dtype=np.uint8)
        # 255 * 0.299 = 76.245, 255 * 0.587 = 149.685, 255 * 0.114 = 29.07
        assert to_gray(frame).tolist() == [[76, 150, 29]]

    def test_gray_stack_matches_per_frame(self, rng):
        frames = rng.integers(0, 256, size=(4, 6, 5, 3), dtype=np.uint8)
        stacked = gray_stack(frames)
        for t in range(4):
            np.testing.assert_array_equal(stacked[t], to_gray(frames[t]))

    def test_value_channel_is_channel_max(self, rng):
        frame = rng.integers(0, 256, size=(8, 9, 3), dtype=np.uint8)
        np.testing.assert_array_equal(to_hsv_value_channel(frame), frame.max(axis=2))

    def test_rejects_gray_input(self):
        with pytest.raises(InvalidInputError):
            to_gray(np.zeros((4, 4), dtype=np.uint8))

    def test_rejects_float_input(self):
        with pytest.raises(InvalidInputError):
            to_gray(np.zeros((4, 4, 3), dtype=np.float32))


class TestHistograms:
    def test_histogram_counts(self):
        gray = np.array([[0, 0, 5], [255, 5, 5]], dtype=np.uint8)
        hist = histogram(gray)
        assert hist.shape == (256,)
        assert hist.sum() == 6
        assert (hist[0], hist[5], hist[255]) == (2, 3, 1)

    def test_equalize_two_levels(self):
        gray = np.array([[64, 192], [64, 192]], dtype=np.uint8)
        assert equalize(gray).tolist() == [[127, 255], [127, 255]]

    def test_equalize_is_monotone(self, rng):
        gray = rng.integers(30, 120, size=(20, 20), dtype=np.uint8)
        eq = equalize(gray)
        order = np.argsort(gray.ravel(), kind="stable")
        assert np.all(np.diff(eq.ravel()[order].astype(int)) >= 0)
        assert eq.max() == 255

    def test_equalize_is_idempotent(self, rng):
        gray = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
        once = equalize(gray)
        np.testing.assert_array_equal(equalize(once), once)

    def test_equalize_ignores_uniform_shift(self, rng):
        gray = rng.integers(20, 150, size=(16, 16), dtype=np.uint8)
        np.testing.assert_array_equal(equalize(gray), equalize(gray + 60))


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        gray = np.full((10, 12), 37, dtype=np.uint8)
        np.testing.assert_allclose(gaussian_blur(gray), 37.0, atol=1e-4)

    def test_preserves_mass_away_from_borders(self):
        gray = np.zeros((21, 21), dtype=np.uint8)
        gray[10, 10] = 100
        blurred = gaussian_blur(gray, sigma=1.0, radius=2)
        assert blurred.dtype == np.float32
        assert blurred.sum() == pytest.approx(100.0, rel=1e-4)
        assert blurred[10, 10] == blurred.max()

    @staticmethod
    def _dense_blur(gray, sigma, radius):
        """Direct 2-D convolution with a normalized Gaussian and replicated borders."""
        offsets = np.arange(-radius, radius + 1)
        g = np.exp(-offsets ** 2 / (2 * sigma ** 2))
        kernel = np.outer(g, g) / np.outer(g, g).sum()
        padded = np.pad(gray.astype(np.float64), radius, mode="edge")
        H, W = gray.shape
        out = np.zeros((H, W))
        for i, dy in enumerate(offsets):
            for j, dx in enumerate(offsets):
                out += kernel[i, j] * padded[radius + dy:radius + dy + H, radius + dx:radius + dx + W]
        return out, kernel

    def test_impulse_response_is_the_kernel(self):
        gray = np.zeros((15, 15), dtype=np.uint8)
        gray[7, 7] = 200
        expected, kernel = self._dense_blur(gray, 1.0, 2)
        blurred = gaussian_blur(gray, sigma=1.0, radius=2)
        np.testing.assert_allclose(blurred[5:10, 5:10], 200 * kernel, atol=1e-3)
        np.testing.assert_allclose(blurred, expected, atol=1e-3)

    @pytest.mark.parametrize("sigma,radius", [(1.0, 2), (2.0, 3), (0.8, 1)])
    def test_matches_dense_convolution(self, rng, sigma, radius):
        gray = rng.integers(0, 256, size=(23, 31), dtype=np.uint8)
        expected, _ = self._dense_blur(gray, sigma, radius)
        np.testing.assert_allclose(gaussian_blur(gray, sigma, radius), expected, atol=2e-3)

    @pytest.mark.parametrize("sigma,radius", [(0.0, 2), (-1.0, 2), (1.0, 0)])
    def test_invalid_parameters(self, sigma, radius):
        with pytest.raises(InvalidInputError):
            gaussian_blur(np.zeros((5, 5), dtype=np.uint8), sigma, radius)


class TestFrameSequence:
    def test_names_are_generated(self):
        seq = FrameSequence(np.zeros((3, 4, 5, 3), dtype=np.uint8))
        assert len(seq) == 3
        assert (seq.height, seq.width) == (4, 5)
        assert seq.names == ("frame000000", "frame000001", "frame000002")

    def test_empty_sequence(self):
        with pytest.raises(EmptySequenceError):
            FrameSequence(np.zeros((0, 4, 5, 3), dtype=np.uint8))
        with pytest.raises(EmptySequenceError):
            FrameSequence.from_frames([])

    def test_from_frames_reports_mismatched_frame(self):
        frames = [np.zeros((4, 5, 3), np.uint8), np.zeros((4, 5, 3), np.uint8), np.zeros((6, 5, 3), np.uint8)]
        with pytest.raises(DimensionMismatchError, match="c.png is 5x6"):
            FrameSequence.from_frames(frames, ["a.png", "b.png", "c.png"])

    def test_subsequence_is_inclusive(self, rng):
        frames = rng.integers(0, 256, size=(6, 4, 4, 3), dtype=np.uint8)
        seq = FrameSequence(frames)
        sub = seq.subsequence(2, 4)
        assert len(sub) == 3
        assert sub.names == seq.names[2:5]
        np.testing.assert_array_equal(sub.gray, seq.gray[2:5])

    def test_subsequence_out_of_range(self):
        seq = FrameSequence(np.zeros((3, 4, 4, 3), dtype=np.uint8))
        with pytest.raises(InvalidInputError):
            seq.subsequence(1, 3)
