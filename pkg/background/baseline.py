"""Temporal median filter baseline."""

import logging

import numpy as np

from imaging.core import ColorFrame, FrameSequence

logger = logging.getLogger(__name__)


def run_tmf(frames: FrameSequence) -> ColorFrame:
    """Per-pixel, per-channel lower median over all frames."""
    stack = frames.frames
    k = (stack.shape[0] - 1) // 2
    logger.debug(f"Temporal median over {stack.shape[0]} frames")
    return np.partition(stack, k, axis=0)[k]
