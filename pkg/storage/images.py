"""Writing result images and debug dumps to the local filesystem."""
from pathlib import Path
from typing import Optional, Sequence
import logging

import numpy as np
from PIL import Image

from detection.motion import MotionMask
from detection.superpixel import SuperpixelLabeling, boundary_overlay
from imaging.core import ColorFrame, FrameSequence

logger = logging.getLogger(__name__)

# Provenance map colors: cluster, unmasked fallback, median fallback.
PROVENANCE_COLORS = np.array([[0, 160, 0], [230, 180, 0], [200, 0, 0]], dtype=np.uint8)


def save_png(image: np.ndarray, path: Path) -> Path:
    """Save an RGB or gray uint8 array as PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image).save(path, "PNG")
    return path


def save_mask_png(mask: MotionMask, path: Path) -> Path:
    """Save a motion mask as a 1-bit PNG (white = moving)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.moving).convert("1").save(path, "PNG")
    return path


def provenance_image(provenance: np.ndarray) -> ColorFrame:
    return PROVENANCE_COLORS[provenance]


class DebugDumper:
    """Writes intermediate stage outputs under one directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def masks(self, masks: Sequence[MotionMask], subdir: str, offset: int = 0) -> None:
        for mask in masks:
            save_mask_png(mask, self.root / subdir / f"mask{mask.frame_index + offset:06d}.png")

    def superpixels(self, frames: FrameSequence, labelings: Sequence[Optional[SuperpixelLabeling]],
                    offset: int = 0) -> None:
        for n, labeling in enumerate(labelings):
            if labeling is not None:
                save_png(boundary_overlay(frames[n], labeling),
                         self.root / "superpixels" / f"overlay{n + offset:06d}.png")

    def provenance(self, provenance: np.ndarray) -> None:
        save_png(provenance_image(provenance), self.root / "provenance.png")

    def stats(self, stats_json: str) -> None:
        (self.root / "stats.json").write_text(stats_json)
        logger.info(f"Debug output written to {self.root}")
