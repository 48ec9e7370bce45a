"""Frame containers and pixel-level image operations.

All frames are numpy arrays:
- color frames are (H, W, 3) uint8 in RGB order
- gray frames are (H, W) uint8 (smoothed intermediates are float32)
- histograms are (256,) int64 counts
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence, Tuple

import cv2
import numpy as np

from errors import DimensionMismatchError, EmptySequenceError, InvalidInputError

ColorFrame = np.ndarray
GrayFrame = np.ndarray
Histogram256 = np.ndarray

# Integer BT.601 luma weights (per mille).
_LUMA_WEIGHTS = np.array([299, 587, 114], dtype=np.uint32)


def check_color_frame(frame: np.ndarray) -> None:
    """Raise InvalidInputError unless frame is an (H, W, 3) uint8 array."""
    if not isinstance(frame, np.ndarray) or frame.ndim != 3 or frame.shape[2] != 3:
        raise InvalidInputError(f"expected an (H, W, 3) color frame, got shape {getattr(frame, 'shape', None)}")
    if frame.dtype != np.uint8:
        raise InvalidInputError(f"expected uint8 color frame, got {frame.dtype}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise InvalidInputError("frame has zero width or height")


def check_gray_frame(frame: np.ndarray) -> None:
    """Raise InvalidInputError unless frame is a non-empty 2-D array."""
    if not isinstance(frame, np.ndarray) or frame.ndim != 2:
        raise InvalidInputError(f"expected an (H, W) gray frame, got shape {getattr(frame, 'shape', None)}")
    if frame.size == 0:
        raise InvalidInputError("frame has zero width or height")


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatchError(f"frame sizes differ: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}")


def to_gray(frame: ColorFrame) -> GrayFrame:
    """Convert an RGB frame to gray with the BT.601 weights, rounding half up.

    Args:
        frame: (H, W, 3) uint8 RGB frame

    Returns:
        (H, W) uint8 gray frame
    """
    check_color_frame(frame)
    weighted = frame.astype(np.uint32) @ _LUMA_WEIGHTS
    return ((weighted + 500) // 1000).astype(np.uint8)


def gray_stack(frames: np.ndarray) -> np.ndarray:
    """Vectorized to_gray over a (T, H, W, 3) stack."""
    weighted = frames.astype(np.uint32) @ _LUMA_WEIGHTS
    return ((weighted + 500) // 1000).astype(np.uint8)


def to_hsv_value_channel(frame: ColorFrame) -> GrayFrame:
    """Return the V channel of the HSV representation (max of R, G, B)."""
    check_color_frame(frame)
    return cv2.cvtColor(frame, cv2.COLOR_RGB2HSV)[:, :, 2]


def histogram(gray: GrayFrame) -> Histogram256:
    """256-bin intensity histogram of a uint8 gray frame."""
    check_gray_frame(gray)
    return np.bincount(gray.ravel(), minlength=256).astype(np.int64)


def equalize(gray: GrayFrame) -> GrayFrame:
    """Histogram equalization through the lookup table floor(255 * cdf(v) / N).

    The mapping is monotone, so level order is preserved and equalizing an
    already equalized frame leaves it unchanged.
    """
    check_gray_frame(gray)
    cdf = np.cumsum(histogram(gray))
    lut = (cdf * 255) // cdf[-1]
    return cv2.LUT(gray, lut.astype(np.uint8))


def gaussian_blur(gray: GrayFrame, sigma: float = 1.0, radius: int = 2) -> np.ndarray:
    """Normalized Gaussian smoothing with edge-replicating borders.

    Args:
        gray: (H, W) frame
        sigma: kernel standard deviation (> 0)
        radius: kernel half-width; the kernel is (2 * radius + 1) square

    Returns:
        (H, W) float32 smoothed frame
    """
    check_gray_frame(gray)
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    if radius < 1:
        raise InvalidInputError(f"radius must be at least 1, got {radius}")
    size = 2 * int(radius) + 1
    return cv2.GaussianBlur(
        gray.astype(np.float32),
        (size, size),
        sigmaX=float(sigma),
        sigmaY=float(sigma),
        borderType=cv2.BORDER_REPLICATE,
    )


@dataclass(frozen=True)
class FrameSequence:
    """An ordered stack of equally sized color frames."""
    frames: np.ndarray  # (T, H, W, 3) uint8
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        frames = self.frames
        if not isinstance(frames, np.ndarray) or frames.ndim != 4 or frames.shape[3] != 3:
            raise InvalidInputError(f"expected a (T, H, W, 3) stack, got shape {getattr(frames, 'shape', None)}")
        if frames.shape[0] == 0:
            raise EmptySequenceError("sequence contains no frames")
        if frames.dtype != np.uint8:
            raise InvalidInputError(f"expected uint8 frames, got {frames.dtype}")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"frame{i:06d}" for i in range(frames.shape[0])))
        elif len(self.names) != frames.shape[0]:
            raise InvalidInputError("names and frames differ in length")

    @classmethod
    def from_frames(cls, frames: Sequence[ColorFrame], names: Sequence[str] = ()) -> "FrameSequence":
        """Stack a list of frames, checking that every frame matches the first."""
        if len(frames) == 0:
            raise EmptySequenceError("sequence contains no frames")
        first = frames[0]
        check_color_frame(first)
        for i, frame in enumerate(frames[1:], start=1):
            check_color_frame(frame)
            if frame.shape != first.shape:
                label = names[i] if names else f"frame {i}"
                raise DimensionMismatchError(
                    f"{label} is {frame.shape[1]}x{frame.shape[0]}, expected {first.shape[1]}x{first.shape[0]}"
                )
        return cls(np.stack(frames), tuple(names))

    def __len__(self) -> int:
        return self.frames.shape[0]

    def __getitem__(self, index: int) -> ColorFrame:
        return self.frames[index]

    def __iter__(self) -> Iterator[ColorFrame]:
        return iter(self.frames)

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @cached_property
    def gray(self) -> np.ndarray:
        """(T, H, W) uint8 gray stack, computed once."""
        return gray_stack(self.frames)

    def subsequence(self, start: int, end: int) -> "FrameSequence":
        """Frames start..end inclusive."""
        if not 0 <= start <= end < len(self):
            raise InvalidInputError(f"invalid subsequence [{start}, {end}] for {len(self)} frames")
        return FrameSequence(self.frames[start:end + 1], self.names[start:end + 1])
