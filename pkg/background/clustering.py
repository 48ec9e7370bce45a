"""Density-based clustering of motionless gray values per pixel position.

At every position the gray values seen in motionless frames are grouped with
a one-dimensional DBSCAN sweep. Because gray values are integers in [0, 255]
the sweep runs over a 256-bin histogram: a value is a core object when its
epsilon-neighborhood (itself included) holds at least MinPts samples, and a
cluster grows rightward while another core object lies inside the current
right boundary. Clusters are value intervals, so the member frames of a
cluster are exactly the motionless frames whose gray value falls inside it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from errors import InvalidInputError
from detection.motion import MotionMask

logger = logging.getLogger(__name__)

# Rows per clustering work unit.
BAND_ROWS = 16


@dataclass(frozen=True)
class ClusterParams:
    epsilon: float = 10.0
    min_pts: Optional[int] = None   # fixed MinPts; None selects the adaptive rule
    min_pts_floor: int = 3
    min_pts_fraction: float = 0.02

    def __post_init__(self):
        if self.epsilon < 1:
            raise InvalidInputError(f"epsilon must be >= 1, got {self.epsilon}")
        if self.min_pts is not None and self.min_pts < 2:
            raise InvalidInputError(f"min_pts must be >= 2, got {self.min_pts}")
        if self.min_pts_floor < 2:
            raise InvalidInputError(f"min_pts_floor must be >= 2, got {self.min_pts_floor}")
        if not 0.0 <= self.min_pts_fraction < 1.0:
            raise InvalidInputError(f"min_pts_fraction must lie in [0, 1), got {self.min_pts_fraction}")

    @property
    def radius(self) -> int:
        """Epsilon on the integer gray scale."""
        return int(math.floor(self.epsilon))

    @property
    def fixed_min_pts(self) -> int:
        """Fixed MinPts, or 0 when the adaptive rule applies."""
        return 0 if self.min_pts is None else int(self.min_pts)

    def min_pts_for(self, sample_count: int) -> int:
        """MinPts used for a position holding sample_count samples."""
        return _min_pts(sample_count, self.fixed_min_pts, self.min_pts_floor, self.min_pts_fraction)


@dataclass(frozen=True)
class MotionlessSeries:
    """Motionless samples at one position: frame index and gray value."""
    position: Tuple[int, int]  # (x, y)
    frame_indices: np.ndarray
    gray_values: np.ndarray

    def __len__(self) -> int:
        return int(self.gray_values.size)

    def sorted(self) -> "MotionlessSeries":
        """Samples ordered by gray value, then frame index."""
        order = np.lexsort((self.frame_indices, self.gray_values))
        return MotionlessSeries(self.position, self.frame_indices[order], self.gray_values[order])

    @classmethod
    def at(cls, gray: np.ndarray, moving: np.ndarray, x: int, y: int) -> "MotionlessSeries":
        """Gather the series at (x, y) from (N, H, W) gray and motion stacks."""
        still = np.flatnonzero(~moving[:, y, x])
        return cls((x, y), still, gray[still, y, x].astype(np.int64))


@dataclass(frozen=True)
class PixelCluster:
    lower: int                    # smallest member gray value
    upper: int                    # largest member gray value
    candidate: int                # lower median of member values
    count: int
    member_frames: Tuple[int, ...] = ()


@dataclass(frozen=True)
class PixelClusterSet:
    position: Tuple[int, int]
    clusters: Tuple[PixelCluster, ...]

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c.count for c in self.clusters], dtype=np.int64)

    @property
    def candidates(self) -> np.ndarray:
        return np.array([c.candidate for c in self.clusters], dtype=np.int64)


@njit(cache=True, nogil=True)
def _min_pts(sample_count, fixed, floor, fraction):
    if fixed > 0:
        return fixed
    adaptive = int(math.ceil(fraction * sample_count))
    return max(floor, adaptive)


@njit(cache=True, nogil=True)
def cluster_histogram(hist, radius, min_pts, lowers, uppers, candidates, counts):
    """Sweep a 256-bin histogram; write clusters into the output arrays.

    Returns the number of clusters written.
    """
    cum = np.zeros(257, np.int64)
    for v in range(256):
        cum[v + 1] = cum[v] + hist[v]

    core = np.zeros(256, np.bool_)
    for v in range(256):
        if hist[v] > 0:
            lo = max(v - radius, 0)
            hi = min(v + radius, 255)
            core[v] = cum[hi + 1] - cum[lo] >= min_pts

    n = 0
    consumed = 0  # first value not claimed by an earlier cluster
    v = 0
    while v < 256:
        if not core[v]:
            v += 1
            continue
        k = v
        left = max(k - radius, consumed)
        right = min(k + radius, 255)
        while True:
            nxt = k
            for j in range(right, k, -1):
                if core[j]:
                    nxt = j
                    break
            if nxt == k:
                break
            k = nxt
            right = min(k + radius, 255)

        while hist[left] == 0:
            left += 1
        while hist[right] == 0:
            right -= 1
        total = cum[right + 1] - cum[left]
        rank = (total - 1) // 2
        median = left
        while cum[median + 1] - cum[left] <= rank:
            median += 1

        lowers[n] = left
        uppers[n] = right
        candidates[n] = median
        counts[n] = total
        n += 1
        consumed = right + 1
        v = right + 1
    return n


@njit(cache=True, nogil=True)
def _cluster_band(gray, moving, y0, y1, radius, fixed, floor, fraction):
    N, H, W = gray.shape
    P = (y1 - y0) * W
    per_pixel = min(N, 256)
    n_clusters = np.zeros(P, np.int32)
    motionless = np.zeros(P, np.int32)
    lowers = np.empty(P * per_pixel, np.uint8)
    uppers = np.empty(P * per_pixel, np.uint8)
    candidates = np.empty(P * per_pixel, np.uint8)
    counts = np.empty(P * per_pixel, np.int32)

    hist = np.zeros(256, np.int64)
    lo_buf = np.empty(256, np.int64)
    hi_buf = np.empty(256, np.int64)
    c_buf = np.empty(256, np.int64)
    q_buf = np.empty(256, np.int64)
    written = 0
    for y in range(y0, y1):
        for x in range(W):
            p = (y - y0) * W + x
            hist[:] = 0
            u = 0
            for t in range(N):
                if not moving[t, y, x]:
                    hist[gray[t, y, x]] += 1
                    u += 1
            motionless[p] = u
            if u == 0:
                continue
            n = cluster_histogram(hist, radius, _min_pts(u, fixed, floor, fraction),
                                  lo_buf, hi_buf, c_buf, q_buf)
            n_clusters[p] = n
            for i in range(n):
                lowers[written] = lo_buf[i]
                uppers[written] = hi_buf[i]
                candidates[written] = c_buf[i]
                counts[written] = q_buf[i]
                written += 1
    return (n_clusters, motionless, lowers[:written].copy(), uppers[:written].copy(),
            candidates[:written].copy(), counts[:written].copy())


@dataclass(frozen=True)
class ClusterGrid:
    """Clusters of every position, stored flat in raster order.

    The clusters of position p = y * width + x are entries
    offsets[p] .. offsets[p + 1] of lowers/uppers/candidates/counts.
    """
    height: int
    width: int
    offsets: np.ndarray      # (H * W + 1,) int64
    lowers: np.ndarray       # uint8
    uppers: np.ndarray       # uint8
    candidates: np.ndarray   # uint8
    counts: np.ndarray       # int32
    motionless_counts: np.ndarray  # (H, W) int32

    @property
    def cluster_counts(self) -> np.ndarray:
        """(H, W) number of clusters at each position."""
        return np.diff(self.offsets).reshape(self.height, self.width)

    @property
    def needs_fallback(self) -> np.ndarray:
        """(H, W) positions without any cluster."""
        return self.cluster_counts == 0

    def cluster_set(self, x: int, y: int) -> PixelClusterSet:
        p = y * self.width + x
        start, end = int(self.offsets[p]), int(self.offsets[p + 1])
        clusters = tuple(
            PixelCluster(int(self.lowers[i]), int(self.uppers[i]), int(self.candidates[i]), int(self.counts[i]))
            for i in range(start, end)
        )
        return PixelClusterSet((x, y), clusters)


def cluster_pixel(series: MotionlessSeries, params: Optional[ClusterParams] = None) -> PixelClusterSet:
    """Cluster the motionless samples of one position.

    Args:
        series: motionless samples; sample order does not matter
        params: epsilon and MinPts policy

    Returns:
        PixelClusterSet with clusters in ascending gray order; noise samples
        belong to no cluster
    """
    params = params or ClusterParams()
    values = np.asarray(series.gray_values, dtype=np.int64)
    if values.size and (values.min() < 0 or values.max() > 255):
        raise InvalidInputError("gray values must lie in [0, 255]")
    if values.size == 0:
        return PixelClusterSet(series.position, ())

    hist = np.bincount(values, minlength=256).astype(np.int64)
    bufs = [np.empty(256, np.int64) for _ in range(4)]
    n = cluster_histogram(hist, params.radius, params.min_pts_for(values.size), *bufs)

    ordered = series.sorted()
    clusters = []
    for i in range(n):
        lower, upper = int(bufs[0][i]), int(bufs[1][i])
        inside = (ordered.gray_values >= lower) & (ordered.gray_values <= upper)
        clusters.append(PixelCluster(lower, upper, int(bufs[2][i]), int(bufs[3][i]),
                                     tuple(int(t) for t in ordered.frame_indices[inside])))
    return PixelClusterSet(series.position, tuple(clusters))


def moving_stack(masks: Sequence[MotionMask] | np.ndarray) -> np.ndarray:
    """(N, H, W) bool stack from a list of masks (or pass an array through)."""
    if isinstance(masks, np.ndarray):
        return masks.astype(bool, copy=False)
    return np.stack([m.moving for m in masks])


def row_bands(height: int, rows: int = BAND_ROWS) -> List[Tuple[int, int]]:
    return [(y0, min(y0 + rows, height)) for y0 in range(0, height, rows)]


def cluster_all_pixels(gray: np.ndarray, masks: Sequence[MotionMask] | np.ndarray,
                       params: Optional[ClusterParams] = None,
                       executor: Optional[Executor] = None) -> ClusterGrid:
    """Cluster the motionless samples of every position.

    Args:
        gray: (N, H, W) uint8 gray stack
        masks: N motion masks (or an (N, H, W) bool stack)
        params: clustering parameters
        executor: optional pool; row bands are clustered concurrently

    Returns:
        ClusterGrid
    """
    params = params or ClusterParams()
    moving = moving_stack(masks)
    if moving.shape != gray.shape:
        raise InvalidInputError(f"mask stack {moving.shape} does not match gray stack {gray.shape}")
    N, H, W = gray.shape

    def band(bounds: Tuple[int, int]):
        return _cluster_band(gray, moving, bounds[0], bounds[1], params.radius, params.fixed_min_pts,
                             params.min_pts_floor, float(params.min_pts_fraction))

    bands = row_bands(H)
    results = list(executor.map(band, bands)) if executor is not None else [band(b) for b in bands]

    n_clusters = np.concatenate([r[0] for r in results])
    offsets = np.zeros(H * W + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(n_clusters)
    grid = ClusterGrid(
        height=H,
        width=W,
        offsets=offsets,
        lowers=np.concatenate([r[2] for r in results]),
        uppers=np.concatenate([r[3] for r in results]),
        candidates=np.concatenate([r[4] for r in results]),
        counts=np.concatenate([r[5] for r in results]),
        motionless_counts=np.concatenate([r[1] for r in results]).reshape(H, W),
    )
    logger.debug(f"Clustered {H * W} positions: {int(offsets[-1])} clusters, "
                 f"{int(grid.needs_fallback.sum())} without clusters")
    return grid
