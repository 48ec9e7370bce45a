import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import DimensionMismatchError, InvalidInputError
from evaluation.metrics import (
    PSNR_CAP_DB,
    MetricReport,
    age,
    cqm,
    evaluate,
    ms_ssim,
    ms_ssim_scales,
    pceps,
    peps,
    psnr,
)


def _neutral(level, shape=(12, 10)):
    return np.full(shape + (3,), level, dtype=np.uint8)


class TestErrorMetrics:
    def test_identical_images(self, textured_frame):
        report = evaluate(textured_frame, textured_frame.copy())
        assert report.age == 0.0
        assert report.peps == 0.0
        assert report.pceps == 0.0
        assert report.psnr == PSNR_CAP_DB
        assert report.ms_ssim == pytest.approx(1.0)
        assert report.cqm == pytest.approx(PSNR_CAP_DB)

    def test_constant_offset(self):
        gt, est = _neutral(100), _neutral(110)
        assert age(gt, est) == pytest.approx(10.0)
        assert peps(gt, est) == 0.0
        assert psnr(gt, est) == pytest.approx(10 * math.log10(255 ** 2 / 100))

    def test_full_range_difference_is_zero_db(self):
        assert psnr(_neutral(0), _neutral(255)) == pytest.approx(0.0, abs=1e-9)

    def test_error_threshold_is_strict(self):
        assert peps(_neutral(100), _neutral(120)) == 0.0
        assert peps(_neutral(100), _neutral(121)) == 1.0
        assert peps(_neutral(100), _neutral(120), tau=19) == 1.0

    def test_clustered_errors_exclude_border(self):
        gt, est = _neutral(100), _neutral(150)
        assert peps(gt, est) == 1.0
        assert pceps(gt, est) == pytest.approx((12 - 2) * (10 - 2) / (12 * 10))

    def test_isolated_error_is_not_clustered(self):
        gt = _neutral(100)
        est = gt.copy()
        est[5, 5] = 200
        assert peps(gt, est) == pytest.approx(1 / 120)
        assert pceps(gt, est) == 0.0

    def test_plus_shaped_error_has_one_clustered_pixel(self):
        gt = _neutral(100)
        est = gt.copy()
        for y, x in [(5, 5), (4, 5), (6, 5), (5, 4), (5, 6)]:
            est[y, x] = 200
        assert peps(gt, est) == pytest.approx(5 / 120)
        assert pceps(gt, est) == pytest.approx(1 / 120)

    def test_uniform_difference_of_five(self, textured_frame):
        shifted = (textured_frame.astype(int) + 5).astype(np.uint8)
        assert age(textured_frame, shifted) == 5.0

    def test_clustered_errors_never_exceed_errors(self, rng):
        for _ in range(200):
            shape = (int(rng.integers(3, 30)), int(rng.integers(3, 30)), 3)
            gt = rng.integers(0, 256, size=shape, dtype=np.uint8)
            est = np.clip(gt + rng.normal(0, rng.uniform(1, 60), size=shape), 0, 255).astype(np.uint8)
            assert pceps(gt, est) <= peps(gt, est)

    def test_gray_inputs_are_accepted(self):
        gt = np.full((8, 8), 40, dtype=np.uint8)
        assert age(gt, gt + 3) == pytest.approx(3.0)

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            age(_neutral(1, (4, 4)), _neutral(1, (4, 5)))


class TestStructuralMetrics:
    @pytest.mark.parametrize("height,width,expected", [(240, 320, 5), (144, 200, 4), (40, 40, 2), (11, 30, 1), (10, 20, 0)])
    def test_scale_count(self, height, width, expected):
        assert ms_ssim_scales(height, width) == expected

    def test_noise_lowers_ms_ssim(self, textured_frame, rng):
        light = np.clip(textured_frame + rng.normal(0, 5, textured_frame.shape), 0, 255).astype(np.uint8)
        heavy = np.clip(textured_frame + rng.normal(0, 40, textured_frame.shape), 0, 255).astype(np.uint8)
        a, b = ms_ssim(textured_frame, light), ms_ssim(textured_frame, heavy)
        assert 0.0 <= b < a < 1.0

    def test_inverted_image_scores_low(self, textured_frame):
        assert ms_ssim(textured_frame, 255 - textured_frame) < 0.5

    def test_ms_ssim_is_symmetric(self, textured_frame, rng):
        noisy = np.clip(textured_frame + rng.normal(0, 15, textured_frame.shape), 0, 255).astype(np.uint8)
        assert ms_ssim(textured_frame, noisy) == pytest.approx(ms_ssim(noisy, textured_frame), abs=1e-9)

    def test_too_small_for_ms_ssim(self):
        with pytest.raises(InvalidInputError):
            ms_ssim(_neutral(10, (10, 20)), _neutral(10, (10, 20)))

    def test_cqm_penalizes_chroma_errors(self, textured_frame):
        shifted = textured_frame.copy()
        shifted[..., 2] = np.clip(shifted[..., 2].astype(int) + 30, 0, 255)
        value = cqm(textured_frame, shifted)
        assert value < PSNR_CAP_DB
        assert value > psnr(textured_frame, shifted) - 20

    def test_cqm_of_luma_only_error(self):
        # neutral grays differ only in Y, so both chroma PSNRs hit the cap
        luma_psnr = 10 * math.log10(255 ** 2 / 10 ** 2)
        expected = 0.9449 * luma_psnr + 0.0551 * PSNR_CAP_DB
        assert cqm(_neutral(100, (16, 16)), _neutral(110, (16, 16))) == pytest.approx(expected, rel=1e-4)

    def test_cqm_needs_color(self):
        with pytest.raises(InvalidInputError):
            cqm(np.zeros((16, 16), np.uint8), np.zeros((16, 16), np.uint8))


class TestReport:
    def test_named_report(self, textured_frame):
        report = evaluate(textured_frame, textured_frame, name="seq1", category="basic")
        assert (report.name, report.category) == ("seq1", "basic")

    def test_clustered_fraction_cannot_exceed_error_fraction(self):
        with pytest.raises(ValidationError):
            MetricReport(age=1.0, peps=0.1, pceps=0.2, psnr=30.0, ms_ssim=0.9, cqm=30.0)

    def test_evaluate_needs_color(self):
        gray = np.zeros((32, 32), np.uint8)
        with pytest.raises(InvalidInputError):
            evaluate(gray, gray)
