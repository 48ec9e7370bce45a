"""SLIC superpixel segmentation.

Pixels are clustered in a 5-D space (CIELAB color + image position) starting
from a regular grid of centers. Each center only searches a 2L x 2L window,
which keeps the cost linear in the number of pixels. A final pass makes every
region 4-connected by merging small fragments into their dominant neighbor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit
from skimage import color, measure, segmentation

from errors import InvalidInputError
from imaging.core import ColorFrame, check_color_frame

logger = logging.getLogger(__name__)

# Average center displacement (pixels) below which iteration stops.
CONVERGENCE_SHIFT = 0.5


@dataclass(frozen=True)
class SlicParams:
    sigma_n: float = 20.0      # controls superpixel size relative to frame size
    m: float = 10.0            # compactness
    max_iterations: int = 10

    def __post_init__(self):
        if self.sigma_n < 2:
            raise InvalidInputError(f"sigma_n must be >= 2, got {self.sigma_n}")
        if self.m <= 0:
            raise InvalidInputError(f"m must be positive, got {self.m}")
        if self.max_iterations < 1:
            raise InvalidInputError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class SuperpixelLabeling:
    labels: np.ndarray  # (H, W) int32 in [0, region_count)
    region_count: int
    superpixel_size: int

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def adaptive_superpixel_size(width: int, height: int, sigma_n: float) -> int:
    """Grid step L = floor(min(width, height) / sigma_n), at least 2."""
    if width < 1 or height < 1 or sigma_n <= 0:
        raise InvalidInputError(f"invalid size request ({width}, {height}, sigma_n={sigma_n})")
    return max(2, int(math.floor(min(width, height) / sigma_n)))


def slic_distance(pixel_a: Sequence[float], pixel_b: Sequence[float], L: float, m: float) -> float:
    """Combined distance between two (l, a, b, y, x) points."""
    if L <= 0 or m <= 0:
        raise InvalidInputError("L and m must be positive")
    a = np.asarray(pixel_a, dtype=np.float64)
    b = np.asarray(pixel_b, dtype=np.float64)
    dc2 = float(np.sum((a[:3] - b[:3]) ** 2))
    ds2 = float(np.sum((a[3:] - b[3:]) ** 2))
    return math.sqrt(dc2 + ds2 / (L * L) * m * m)


def _lab_gradient(lab: np.ndarray) -> np.ndarray:
    padded = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    return np.sum(gx * gx, axis=2) + np.sum(gy * gy, axis=2)


def _initial_centers(lab: np.ndarray, L: int) -> np.ndarray:
    """Grid seeds moved to the lowest-gradient pixel of their 3x3 neighborhood."""
    H, W, _ = lab.shape
    ys, xs = np.meshgrid(np.arange(L // 2, H, L), np.arange(L // 2, W, L), indexing="ij")
    ys, xs = ys.ravel(), xs.ravel()
    gradient = _lab_gradient(lab)

    # the seed itself comes first so it stays put on gradient ties
    offsets = [(0, 0)] + [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    cand_y = np.stack([np.clip(ys + dy, 0, H - 1) for dy, _ in offsets])
    cand_x = np.stack([np.clip(xs + dx, 0, W - 1) for _, dx in offsets])
    best = np.argmin(gradient[cand_y, cand_x], axis=0)
    cy = cand_y[best, np.arange(ys.size)]
    cx = cand_x[best, np.arange(xs.size)]

    centers = np.empty((ys.size, 5), dtype=np.float64)
    centers[:, :3] = lab[cy, cx]
    centers[:, 3] = cy
    centers[:, 4] = cx
    return centers


@njit(cache=True, nogil=True)
def _slic_iterate(lab, centers, L, m, max_iterations, min_shift):
    H, W = lab.shape[0], lab.shape[1]
    K = centers.shape[0]
    labels = np.full((H, W), -1, np.int32)
    dist = np.empty((H, W), np.float64)
    spatial_weight = (m / L) ** 2

    for _ in range(max_iterations):
        dist[:, :] = np.inf
        for k in range(K):
            cl, ca, cb, cy, cx = centers[k, 0], centers[k, 1], centers[k, 2], centers[k, 3], centers[k, 4]
            y0 = max(int(cy) - L, 0)
            y1 = min(int(cy) + L + 1, H)
            x0 = max(int(cx) - L, 0)
            x1 = min(int(cx) + L + 1, W)
            for y in range(y0, y1):
                for x in range(x0, x1):
                    dl = lab[y, x, 0] - cl
                    da = lab[y, x, 1] - ca
                    db = lab[y, x, 2] - cb
                    d = dl * dl + da * da + db * db + ((y - cy) ** 2 + (x - cx) ** 2) * spatial_weight
                    # strict comparison keeps ties with the lower center id
                    if d < dist[y, x]:
                        dist[y, x] = d
                        labels[y, x] = k

        sums = np.zeros((K, 5), np.float64)
        counts = np.zeros(K, np.int64)
        for y in range(H):
            for x in range(W):
                k = labels[y, x]
                if k >= 0:
                    sums[k, 0] += lab[y, x, 0]
                    sums[k, 1] += lab[y, x, 1]
                    sums[k, 2] += lab[y, x, 2]
                    sums[k, 3] += y
                    sums[k, 4] += x
                    counts[k] += 1

        shift = 0.0
        for k in range(K):
            if counts[k] > 0:
                ny = sums[k, 3] / counts[k]
                nx = sums[k, 4] / counts[k]
                shift += math.sqrt((ny - centers[k, 3]) ** 2 + (nx - centers[k, 4]) ** 2)
                for c in range(3):
                    centers[k, c] = sums[k, c] / counts[k]
                centers[k, 3] = ny
                centers[k, 4] = nx
        if shift / K < min_shift:
            break

    # pixels no window reached get a label of their own; connectivity
    # enforcement folds them into a neighbor
    for y in range(H):
        for x in range(W):
            if labels[y, x] < 0:
                labels[y, x] = K
    return labels


def enforce_connectivity(labels: np.ndarray, min_size: int) -> np.ndarray:
    """Relabel so every region is one 4-connected component of >= min_size pixels.

    Components below min_size join the adjacent region they share the longest
    border with (ties to the lower region id). Output ids are 0..count-1 in
    raster order of each region's first pixel.
    """
    components = measure.label(labels.astype(np.int64) + 1, background=0, connectivity=1)
    n_components = int(components.max())
    sizes = np.bincount(components.ravel(), minlength=n_components + 1)

    kept = np.flatnonzero(sizes >= min_size)
    kept = kept[kept > 0]
    if kept.size == 0:
        kept = np.array([int(np.argmax(sizes[1:])) + 1])
    final = np.full(n_components + 1, -1, dtype=np.int64)
    final[kept] = np.arange(kept.size)

    # 4-adjacent pairs of distinct components, both directions
    pairs = []
    for a, b in ((components[:, :-1], components[:, 1:]), (components[:-1, :], components[1:, :])):
        differ = a != b
        pairs.append(np.stack([a[differ], b[differ]], axis=1))
        pairs.append(np.stack([b[differ], a[differ]], axis=1))
    pairs = np.concatenate(pairs)

    while np.any(final[1:] < 0):
        open_pairs = pairs[(final[pairs[:, 0]] < 0) & (final[pairs[:, 1]] >= 0)]
        if open_pairs.size == 0:
            break
        targets = final[open_pairs[:, 1]]
        keyed, counts = np.unique(np.stack([open_pairs[:, 0], targets], axis=1), axis=0, return_counts=True)
        # per fragment: most shared border first, then lowest target id
        order = np.lexsort((keyed[:, 1], -counts, keyed[:, 0]))
        keyed = keyed[order]
        first = np.ones(len(keyed), dtype=bool)
        first[1:] = keyed[1:, 0] != keyed[:-1, 0]
        final[keyed[first, 0]] = keyed[first, 1]

    relabeled = final[components]
    # renumber by first appearance so ids are contiguous and raster ordered
    _, first_index, inverse = np.unique(relabeled.ravel(), return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first_index))
    return rank[inverse].reshape(labels.shape).astype(np.int32)


def segment(frame: ColorFrame, params: SlicParams | None = None) -> SuperpixelLabeling:
    """Segment a color frame into superpixels.

    Args:
        frame: (H, W, 3) uint8 RGB frame
        params: SLIC parameters

    Returns:
        SuperpixelLabeling with contiguous, 4-connected regions
    """
    params = params or SlicParams()
    check_color_frame(frame)
    H, W = frame.shape[:2]
    L = adaptive_superpixel_size(W, H, params.sigma_n)
    if min(W, H) < 2 * L:
        raise InvalidInputError(f"frame {W}x{H} is smaller than one superpixel cell (L={L})")

    lab = color.rgb2lab(frame)
    centers = _initial_centers(lab, L)
    raw = _slic_iterate(lab, centers, L, float(params.m), int(params.max_iterations), CONVERGENCE_SHIFT)
    labels = enforce_connectivity(raw, max(1, math.ceil(L * L / 4)))
    region_count = int(labels.max()) + 1
    logger.debug(f"SLIC {W}x{H}: L={L}, {centers.shape[0]} seeds, {region_count} regions")
    return SuperpixelLabeling(labels, region_count, L)


def boundary_overlay(frame: ColorFrame, labeling: SuperpixelLabeling) -> ColorFrame:
    """Frame with superpixel boundaries drawn in yellow."""
    marked = segmentation.mark_boundaries(frame, labeling.labels, color=(1, 1, 0))
    return np.clip(np.rint(marked * 255), 0, 255).astype(np.uint8)
