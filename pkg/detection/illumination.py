"""Illumination change detection and stable subsequence selection.

A frame is treated as an illumination change against a reference frame when
the raw V-channel histograms differ strongly while the equalized histograms
stay close: the scene content is the same but its brightness moved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import EmptySequenceError, InvalidInputError
from imaging.core import (
    ColorFrame,
    FrameSequence,
    Histogram256,
    check_same_shape,
    equalize,
    histogram,
    to_hsv_value_channel,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IlluminationParams:
    tau_h: float = 0.20   # raw histogram distance threshold
    tau_eh: float = 0.10  # equalized histogram distance threshold

    def __post_init__(self):
        for name in ("tau_h", "tau_eh"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InvalidInputError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class SubsequenceSelection:
    """Inclusive frame range [start_index, end_index] chosen for processing."""
    start_index: int
    end_index: int
    boundaries: Tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1


def hellinger_distance(h1: Histogram256, h2: Histogram256) -> float:
    """Hellinger distance between two histograms, normalized to [0, 1]."""
    a = np.asarray(h1, dtype=np.float64)
    b = np.asarray(h2, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"histogram lengths differ: {a.shape} vs {b.shape}")
    sa, sb = a.sum(), b.sum()
    if sa <= 0 or sb <= 0:
        raise InvalidInputError("histogram has zero total count")
    coefficient = float(np.sum(np.sqrt(a * b)) / math.sqrt(sa * sb))
    return math.sqrt(max(0.0, 1.0 - min(coefficient, 1.0)))


def value_histograms(frame: ColorFrame) -> Tuple[Histogram256, Histogram256]:
    """Raw and equalized histograms of the HSV V channel."""
    value = to_hsv_value_channel(frame)
    return histogram(value), histogram(equalize(value))


def _is_change(reference: Tuple[Histogram256, Histogram256],
               current: Tuple[Histogram256, Histogram256],
               params: IlluminationParams) -> bool:
    return (hellinger_distance(reference[0], current[0]) > params.tau_h
            and hellinger_distance(reference[1], current[1]) < params.tau_eh)


def is_illumination_change(reference_frame: ColorFrame, current_frame: ColorFrame,
                           params: Optional[IlluminationParams] = None) -> bool:
    """True when current_frame shows an illumination change against reference_frame."""
    params = params or IlluminationParams()
    check_same_shape(reference_frame, current_frame)
    return _is_change(value_histograms(reference_frame), value_histograms(current_frame), params)


def select_stable_subsequence(frames: FrameSequence,
                              params: Optional[IlluminationParams] = None) -> SubsequenceSelection:
    """Pick the longest run of frames between illumination changes.

    The reference starts at frame 0 and moves to every frame flagged as a
    change. Ties between equally long runs go to the later run.
    """
    params = params or IlluminationParams()
    if len(frames) == 0:
        raise EmptySequenceError("sequence contains no frames")

    reference = value_histograms(frames[0])
    boundaries: List[int] = []
    for t in range(1, len(frames)):
        current = value_histograms(frames[t])
        if _is_change(reference, current, params):
            logger.debug(f"Illumination change at frame {t}")
            boundaries.append(t)
            reference = current

    starts = [0] + boundaries
    ends = [b - 1 for b in boundaries] + [len(frames) - 1]
    best = 0
    for i in range(1, len(starts)):
        if ends[i] - starts[i] >= ends[best] - starts[best]:
            best = i

    selection = SubsequenceSelection(starts[best], ends[best], tuple(boundaries))
    if boundaries:
        logger.info(f"Illumination changes at {boundaries}; using frames "
                    f"{selection.start_index}..{selection.end_index}")
    return selection
