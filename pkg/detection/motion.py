"""Per-frame motion masks.

Each mask comes from the smoothed temporal difference of two gray frames,
binarized at the Otsu threshold and then dilated to whole superpixels: a
region with any moving pixel is moving as a whole.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np

from errors import DimensionMismatchError, EmptySequenceError, InvalidInputError
from imaging.core import FrameSequence, GrayFrame, check_gray_frame, gaussian_blur, histogram
from detection.superpixel import SuperpixelLabeling

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MotionParams:
    blur_sigma: float = 1.0
    blur_radius: int = 2
    # static-scene guard: below either value the frame has no motion
    min_between_variance: float = 1.0
    min_peak_difference: float = 4.0
    superpixel_dilation: bool = True

    def __post_init__(self):
        if self.blur_sigma <= 0:
            raise InvalidInputError(f"blur_sigma must be positive, got {self.blur_sigma}")
        if self.blur_radius < 1:
            raise InvalidInputError(f"blur_radius must be >= 1, got {self.blur_radius}")
        if self.min_between_variance < 0 or self.min_peak_difference < 0:
            raise InvalidInputError("static-scene guard thresholds must be non-negative")


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    between_class_variance: float


@dataclass(frozen=True)
class MotionMask:
    moving: np.ndarray  # (H, W) bool
    frame_index: int = 0

    @property
    def height(self) -> int:
        return self.moving.shape[0]

    @property
    def width(self) -> int:
        return self.moving.shape[1]

    def with_index(self, frame_index: int) -> "MotionMask":
        return MotionMask(self.moving.copy(), frame_index)


def frame_difference(cur: GrayFrame, prev: GrayFrame) -> GrayFrame:
    """Absolute per-pixel difference |cur - prev|."""
    check_gray_frame(cur)
    check_gray_frame(prev)
    if cur.shape != prev.shape:
        raise DimensionMismatchError(f"frame sizes differ: {cur.shape} vs {prev.shape}")
    return cv2.absdiff(cur, prev)


def otsu_threshold(gray: GrayFrame) -> OtsuResult:
    """Threshold maximizing the between-class variance of {v < g} and {v >= g}.

    The search runs in exact integer arithmetic over g in [0, 255], so the
    smallest maximizing g is found without floating-point ties.
    """
    counts = histogram(gray).tolist()
    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))

    best_g, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for g in range(256):
        n1 = total - n0
        if n0 and n1:
            num = (total * s0 - n0 * total_sum) ** 2
            den = n0 * n1
            if num * best_den > best_num * den:
                best_g, best_num, best_den = g, num, den
        n0 += counts[g]
        s0 += g * counts[g]

    variance = best_num / (best_den * total * total) if best_num else 0.0
    return OtsuResult(best_g, float(variance))


def pixel_motion_mask(diff_smoothed: GrayFrame, tau_opt: int, frame_index: int = 0) -> MotionMask:
    """Pixels whose smoothed difference reaches the threshold."""
    check_gray_frame(diff_smoothed)
    return MotionMask(diff_smoothed >= tau_opt, frame_index)


def superpixel_motion_mask(pixel_mask: MotionMask, labeling: SuperpixelLabeling) -> MotionMask:
    """Mark every superpixel that contains at least one moving pixel."""
    if pixel_mask.moving.shape != labeling.labels.shape:
        raise DimensionMismatchError(
            f"mask {pixel_mask.moving.shape} and labeling {labeling.labels.shape} differ in size"
        )
    hits = np.bincount(labeling.labels.ravel(), weights=pixel_mask.moving.ravel(),
                       minlength=labeling.region_count)
    return MotionMask(hits[labeling.labels] > 0, pixel_mask.frame_index)


def frame_motion(prev: GrayFrame, cur: GrayFrame, labeling: Optional[SuperpixelLabeling],
                 params: MotionParams, frame_index: int = 0) -> Tuple[MotionMask, MotionMask]:
    """Pixel-level and superpixel-level masks of frame cur against prev."""
    smoothed = gaussian_blur(frame_difference(cur, prev), params.blur_sigma, params.blur_radius)
    rounded = np.clip(np.rint(smoothed), 0, 255).astype(np.uint8)
    otsu = otsu_threshold(rounded)

    if otsu.between_class_variance < params.min_between_variance or float(smoothed.max()) < params.min_peak_difference:
        logger.debug(f"Frame {frame_index}: static (variance {otsu.between_class_variance:.3f})")
        empty = MotionMask(np.zeros(cur.shape, dtype=bool), frame_index)
        return empty, empty

    pixel_mask = pixel_motion_mask(rounded, otsu.threshold, frame_index)
    if not params.superpixel_dilation or labeling is None:
        return pixel_mask, pixel_mask
    return pixel_mask, superpixel_motion_mask(pixel_mask, labeling)


def motion_masks_for_subsequence(frames: FrameSequence,
                                 labelings: Sequence[Optional[SuperpixelLabeling]],
                                 params: Optional[MotionParams] = None,
                                 executor: Optional[Executor] = None,
                                 pixel_masks: Optional[List[MotionMask]] = None) -> List[MotionMask]:
    """Motion masks for every frame of the subsequence.

    The first frame has no predecessor and reuses the mask of the second.
    When pixel_masks is given, the pre-dilation masks are appended to it.
    """
    params = params or MotionParams()
    N = len(frames)
    if N == 0:
        raise EmptySequenceError("sequence contains no frames")
    if N < 2:
        raise InvalidInputError("motion masks need at least two frames")
    if len(labelings) != N:
        raise InvalidInputError(f"expected {N} labelings, got {len(labelings)}")

    gray = frames.gray

    def one(n: int) -> Tuple[MotionMask, MotionMask]:
        return frame_motion(gray[n - 1], gray[n], labelings[n], params, n)

    if executor is None:
        results = [one(n) for n in range(1, N)]
    else:
        results = list(executor.map(one, range(1, N)))

    masks = [results[0][1].with_index(0)] + [r[1] for r in results]
    if pixel_masks is not None:
        pixel_masks.extend([results[0][0].with_index(0)] + [r[0] for r in results])
    return masks
