"""Background quality metrics.

All gray-level metrics compare the BT.601 gray versions of the ground truth
and the estimate. PSNR values (including the per-channel PSNRs inside CQM)
are capped at PSNR_CAP_DB so identical images report a finite value.
"""

from __future__ import annotations

import math
from typing import Optional

import cv2
import numpy as np
from pydantic import BaseModel, Field, model_validator

from errors import DimensionMismatchError, InvalidInputError
from imaging.core import check_color_frame, to_gray

PSNR_CAP_DB = 100.0
ERROR_THRESHOLD = 20

# Canonical per-scale exponents, finest scale first.
MS_SSIM_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = (0.01 * 255) ** 2
_C2 = (0.03 * 255) ** 2

CQM_LUMA_WEIGHT = 0.9449
CQM_CHROMA_WEIGHT = 0.0551


class MetricReport(BaseModel):
    """The six scores of one (ground truth, estimate) pair."""
    name: Optional[str] = None
    category: Optional[str] = None
    age: float = Field(ge=0.0)
    peps: float = Field(ge=0.0, le=1.0)
    pceps: float = Field(ge=0.0, le=1.0)
    psnr: float
    ms_ssim: float = Field(ge=0.0, le=1.0)
    cqm: float

    @model_validator(mode="after")
    def _clustered_within_errors(self):
        if self.pceps > self.peps:
            raise ValueError(f"pceps {self.pceps} exceeds peps {self.peps}")
        return self


def _gray_pair(gt: np.ndarray, est: np.ndarray):
    if gt.shape != est.shape:
        raise DimensionMismatchError(f"image sizes differ: {gt.shape} vs {est.shape}")
    if gt.ndim == 3:
        return to_gray(gt).astype(np.float64), to_gray(est).astype(np.float64)
    if gt.ndim != 2:
        raise InvalidInputError(f"expected a color or gray image, got shape {gt.shape}")
    return gt.astype(np.float64), est.astype(np.float64)


def _psnr_from_mse(mse: float) -> float:
    if mse == 0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(255.0 ** 2 / mse))


def _error_pixels(gt: np.ndarray, est: np.ndarray, tau: int) -> np.ndarray:
    g, e = _gray_pair(gt, est)
    return np.abs(g - e) > tau


def age(gt: np.ndarray, est: np.ndarray) -> float:
    """Average gray-level error."""
    g, e = _gray_pair(gt, est)
    return float(np.mean(np.abs(g - e)))


def peps(gt: np.ndarray, est: np.ndarray, tau: int = ERROR_THRESHOLD) -> float:
    """Fraction of error pixels (gray difference strictly above tau)."""
    return float(np.mean(_error_pixels(gt, est, tau)))


def pceps(gt: np.ndarray, est: np.ndarray, tau: int = ERROR_THRESHOLD) -> float:
    """Fraction of error pixels whose four neighbors are all error pixels.

    Border pixels lack a neighbor and never count.
    """
    errors = _error_pixels(gt, est, tau).astype(np.uint8)
    cross = cv2.getStructuringElement(cv2.MORPH_CROSS, (3, 3))
    clustered = cv2.erode(errors, cross, borderType=cv2.BORDER_CONSTANT, borderValue=0)
    return float(np.mean(clustered > 0))


def psnr(gt: np.ndarray, est: np.ndarray) -> float:
    g, e = _gray_pair(gt, est)
    return _psnr_from_mse(float(np.mean((g - e) ** 2)))


def _ssim_terms(a: np.ndarray, b: np.ndarray):
    """Mean luminance and contrast-structure terms over valid windows."""
    kernel = cv2.getGaussianKernel(SSIM_WINDOW, SSIM_SIGMA)
    window = kernel @ kernel.T
    half = SSIM_WINDOW // 2

    def filt(img):
        return cv2.filter2D(img, cv2.CV_64F, window, borderType=cv2.BORDER_REFLECT)[half:-half, half:-half]

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    luminance = (2 * mu_a * mu_b + _C1) / (mu_a * mu_a + mu_b * mu_b + _C1)
    contrast_structure = (2 * cov + _C2) / (var_a + var_b + _C2)
    return float(np.mean(luminance)), float(np.mean(contrast_structure))


def _downsample(img: np.ndarray) -> np.ndarray:
    h, w = (img.shape[0] // 2) * 2, (img.shape[1] // 2) * 2
    img = img[:h, :w]
    return (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2]) / 4.0


def ms_ssim_scales(height: int, width: int) -> int:
    """Number of scales (at most five) whose images still fit the window."""
    smallest = min(height, width)
    scales = 0
    while scales < len(MS_SSIM_WEIGHTS) and smallest >> scales >= SSIM_WINDOW:
        scales += 1
    return scales


def ms_ssim(gt: np.ndarray, est: np.ndarray) -> float:
    """Multi-scale structural similarity on gray images.

    Raises:
        InvalidInputError: the image is smaller than one SSIM window
    """
    a, b = _gray_pair(gt, est)
    scales = ms_ssim_scales(*a.shape)
    if scales == 0:
        raise InvalidInputError(f"image {a.shape[1]}x{a.shape[0]} is too small for MS-SSIM")
    weights = MS_SSIM_WEIGHTS[:scales] / MS_SSIM_WEIGHTS[:scales].sum()

    value = 1.0
    for j in range(scales):
        luminance, contrast_structure = _ssim_terms(a, b)
        if j == scales - 1:
            value *= max(luminance * contrast_structure, 0.0) ** weights[j]
        else:
            value *= max(contrast_structure, 0.0) ** weights[j]
            a, b = _downsample(a), _downsample(b)
    return float(min(max(value, 0.0), 1.0))


def cqm(gt: np.ndarray, est: np.ndarray) -> float:
    """Color quality measure from per-channel YUV PSNRs."""
    check_color_frame(gt)
    check_color_frame(est)
    if gt.shape != est.shape:
        raise DimensionMismatchError(f"image sizes differ: {gt.shape} vs {est.shape}")
    yuv_gt = cv2.cvtColor(gt.astype(np.float32), cv2.COLOR_RGB2YUV).astype(np.float64)
    yuv_est = cv2.cvtColor(est.astype(np.float32), cv2.COLOR_RGB2YUV).astype(np.float64)
    channel_psnr = [_psnr_from_mse(float(np.mean((yuv_gt[..., c] - yuv_est[..., c]) ** 2))) for c in range(3)]
    return CQM_LUMA_WEIGHT * channel_psnr[0] + CQM_CHROMA_WEIGHT * (channel_psnr[1] + channel_psnr[2]) / 2.0


def evaluate(gt: np.ndarray, est: np.ndarray, tau: int = ERROR_THRESHOLD,
             name: Optional[str] = None, category: Optional[str] = None) -> MetricReport:
    """All six metrics for a color (ground truth, estimate) pair."""
    check_color_frame(gt)
    check_color_frame(est)
    return MetricReport(
        name=name,
        category=category,
        age=age(gt, est),
        peps=peps(gt, est, tau),
        pceps=pceps(gt, est, tau),
        psnr=psnr(gt, est),
        ms_ssim=ms_ssim(gt, est),
        cqm=cqm(gt, est),
    )
