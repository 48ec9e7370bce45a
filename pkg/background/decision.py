"""Final background decision and color reconstruction.

Each position picks the cluster with the best ratio of member count to
distance from a reference gray value (the mean of the first and last
frames). Positions without clusters fall back to clustering all frames,
then to the temporal median.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence, Tuple

import numpy as np
from numba import njit

from errors import DimensionMismatchError, FallbackRequiredError, InvalidInputError
from imaging.core import ColorFrame, FrameSequence, GrayFrame
from detection.motion import MotionMask
from background.clustering import (
    ClusterGrid,
    ClusterParams,
    PixelClusterSet,
    _min_pts,
    cluster_histogram,
    moving_stack,
    row_bands,
)

logger = logging.getLogger(__name__)


class Provenance(IntEnum):
    """How the background value of a pixel was decided."""
    CLUSTER = 0    # clusters of motionless samples
    UNMASKED = 1   # clusters of all samples, motion ignored
    MEDIAN = 2     # temporal median of all samples


@dataclass(frozen=True)
class ReferenceFrame:
    gray: GrayFrame


@dataclass(frozen=True)
class BackgroundEstimate:
    color: ColorFrame       # (H, W, 3) uint8
    gray: GrayFrame         # (H, W) uint8 decision values
    provenance: np.ndarray  # (H, W) uint8 of Provenance values

    @property
    def fallback_count(self) -> int:
        return int(np.count_nonzero(self.provenance != Provenance.CLUSTER))


def build_reference(frames: FrameSequence) -> ReferenceFrame:
    """Mean of the first and last gray frames, rounded half up."""
    first = frames.gray[0].astype(np.int32)
    last = frames.gray[-1].astype(np.int32)
    return ReferenceFrame(((first + last + 1) // 2).astype(np.uint8))


@njit(cache=True, nogil=True)
def _decide(counts, candidates, start, end, r):
    """Index in [start, end) of the winning cluster.

    Scores q / max(|c - r|, 1) are compared by cross-multiplication; ties go
    to the larger q, then the smaller |c - r|, then the lower candidate.
    Candidates and r may arrive as uint8, so everything is cast to int64.
    """
    ref = np.int64(r)
    best = start
    best_q = np.int64(counts[start])
    best_c = np.int64(candidates[start])
    best_gap = abs(best_c - ref)
    best_d = max(best_gap, np.int64(1))
    for i in range(start + 1, end):
        q = np.int64(counts[i])
        c = np.int64(candidates[i])
        gap = abs(c - ref)
        d = max(gap, np.int64(1))
        lhs = q * best_d
        rhs = best_q * d
        if lhs > rhs or (lhs == rhs and (q > best_q or (q == best_q and (
                gap < best_gap or (gap == best_gap and c < best_c))))):
            best, best_q, best_c, best_gap, best_d = i, q, c, gap, d
    return best


def decide_pixel(clusters: PixelClusterSet, r: int) -> Tuple[int, int]:
    """Winning cluster index and its candidate gray value.

    Raises:
        FallbackRequiredError: the position has no clusters
    """
    if len(clusters) == 0:
        raise FallbackRequiredError(f"no clusters at position {clusters.position}")
    counts = clusters.counts
    candidates = clusters.candidates
    index = int(_decide(counts, candidates, 0, len(counts), int(r)))
    return index, int(candidates[index])


@njit(cache=True, nogil=True)
def _decide_band(offsets, lowers, uppers, candidates, counts, reference, gray,
                 y0, y1, radius, fixed, floor, fraction,
                 out_gray, out_lower, out_upper, out_provenance):
    N, H, W = gray.shape
    hist = np.zeros(256, np.int64)
    lo_buf = np.empty(256, np.int64)
    hi_buf = np.empty(256, np.int64)
    c_buf = np.empty(256, np.int64)
    q_buf = np.empty(256, np.int64)
    for y in range(y0, y1):
        for x in range(W):
            p = y * W + x
            r = np.int64(reference[y, x])
            start, end = offsets[p], offsets[p + 1]
            if end > start:
                i = _decide(counts, candidates, start, end, r)
                out_gray[y, x] = candidates[i]
                out_lower[y, x] = lowers[i]
                out_upper[y, x] = uppers[i]
                out_provenance[y, x] = 0
                continue

            hist[:] = 0
            for t in range(N):
                hist[gray[t, y, x]] += 1
            n = cluster_histogram(hist, radius, _min_pts(N, fixed, floor, fraction),
                                  lo_buf, hi_buf, c_buf, q_buf)
            if n > 0:
                i = _decide(q_buf, c_buf, 0, n, r)
                out_gray[y, x] = c_buf[i]
                out_lower[y, x] = lo_buf[i]
                out_upper[y, x] = hi_buf[i]
                out_provenance[y, x] = 1
                continue

            rank = (N - 1) // 2
            seen = 0
            v = 0
            while seen + hist[v] <= rank:
                seen += hist[v]
                v += 1
            out_gray[y, x] = v
            out_lower[y, x] = 0
            out_upper[y, x] = 255
            out_provenance[y, x] = 2


@njit(cache=True, nogil=True)
def _masked_lower_median(frames, members, y0, y1, out):
    N, H, W, C = frames.shape
    buf = np.empty(N, np.uint8)
    for y in range(y0, y1):
        for x in range(W):
            k = 0
            for t in range(N):
                if members[t, y, x]:
                    k += 1
            use_all = k == 0
            for c in range(C):
                k = 0
                for t in range(N):
                    if use_all or members[t, y, x]:
                        buf[k] = frames[t, y, x, c]
                        k += 1
                ordered = np.sort(buf[:k])
                out[y, x, c] = ordered[(k - 1) // 2]


def reconstruct_color(frames: FrameSequence | np.ndarray, members: np.ndarray,
                      executor: Optional[Executor] = None) -> ColorFrame:
    """Per-channel lower median of each pixel over its member frames.

    Args:
        frames: sequence or (N, H, W, 3) uint8 stack
        members: (N, H, W) bool; positions with no member use every frame
        executor: optional pool for row bands

    Returns:
        (H, W, 3) uint8 color frame
    """
    stack = frames.frames if isinstance(frames, FrameSequence) else frames
    if members.shape != stack.shape[:3]:
        raise DimensionMismatchError(f"member stack {members.shape} does not match frames {stack.shape[:3]}")
    out = np.empty(stack.shape[1:], dtype=np.uint8)

    def band(bounds):
        _masked_lower_median(stack, members, bounds[0], bounds[1], out)

    bands = row_bands(stack.shape[1])
    if executor is None:
        for b in bands:
            band(b)
    else:
        list(executor.map(band, bands))
    return out


def estimate_background(frames: FrameSequence, masks: Sequence[MotionMask] | np.ndarray,
                        grid: ClusterGrid, params: Optional[ClusterParams] = None,
                        reference: Optional[ReferenceFrame] = None,
                        executor: Optional[Executor] = None) -> BackgroundEstimate:
    """Decide every position and rebuild the color background.

    Args:
        frames: the processed subsequence
        masks: motion masks used to build grid
        grid: clusters of motionless samples
        params: clustering parameters, reused for the unmasked fallback
        reference: reference gray frame; built from frames when omitted
        executor: optional pool for row bands

    Returns:
        BackgroundEstimate with a provenance tag per pixel
    """
    params = params or ClusterParams()
    gray = frames.gray
    N, H, W = gray.shape
    if (grid.height, grid.width) != (H, W):
        raise DimensionMismatchError(f"cluster grid {grid.width}x{grid.height} does not match frames {W}x{H}")
    moving = moving_stack(masks)
    if moving.shape != gray.shape:
        raise InvalidInputError(f"mask stack {moving.shape} does not match gray stack {gray.shape}")
    reference = reference or build_reference(frames)

    out_gray = np.empty((H, W), dtype=np.uint8)
    lower = np.empty((H, W), dtype=np.int16)
    upper = np.empty((H, W), dtype=np.int16)
    provenance = np.empty((H, W), dtype=np.uint8)

    def band(bounds):
        _decide_band(grid.offsets, grid.lowers, grid.uppers, grid.candidates, grid.counts,
                     reference.gray, gray, bounds[0], bounds[1], params.radius, params.fixed_min_pts,
                     params.min_pts_floor, float(params.min_pts_fraction),
                     out_gray, lower, upper, provenance)

    bands = row_bands(H)
    if executor is None:
        for b in bands:
            band(b)
    else:
        list(executor.map(band, bands))

    members = (gray >= lower) & (gray <= upper)
    members &= ~moving | (provenance != Provenance.CLUSTER)[None]
    color = reconstruct_color(frames, members, executor)

    estimate = BackgroundEstimate(color, out_gray, provenance)
    if estimate.fallback_count:
        unmasked = int(np.count_nonzero(provenance == Provenance.UNMASKED))
        median = int(np.count_nonzero(provenance == Provenance.MEDIAN))
        logger.info(f"Fallback positions: {unmasked} unmasked clustering, {median} temporal median")
    return estimate


def single_frame_estimate(frame: ColorFrame, gray: GrayFrame) -> BackgroundEstimate:
    """A one-frame sequence is its own background."""
    provenance = np.full(gray.shape, Provenance.MEDIAN, dtype=np.uint8)
    return BackgroundEstimate(frame.copy(), gray.copy(), provenance)
