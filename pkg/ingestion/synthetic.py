"""Synthetic sequences with exact ground-truth backgrounds.

Scenes are declared in YAML and validated by pydantic:

    width: 320
    height: 240
    frames: 100
    seed: 7
    noise_sigma: 2.0
    background: {kind: texture, seed: 3}
    objects:
      - {shape: box, size: [40, 40], color: [250, 250, 250], start: [0, 60], velocity: [2.8, 0]}
    illumination:
      - {frame: 40, offset: 60}

Object positions are the top-left corner at frame t: start + velocity * t,
optionally reflected at the frame edges (bounce) or wrapped around them (wrap).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import cv2
import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import InvalidSceneError
from imaging.core import ColorFrame, FrameSequence

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]


class BackgroundSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["texture", "bands", "solid"] = "texture"
    color: RGB = (128, 128, 128)
    bands: List[RGB] = Field(default_factory=list)
    value_range: Tuple[int, int] = (40, 180)
    cell: int = Field(default=16, ge=2)
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        lo, hi = self.value_range
        if not 0 <= lo <= hi <= 255:
            raise ValueError(f"value_range must satisfy 0 <= lo <= hi <= 255, got {self.value_range}")
        if self.kind == "bands" and not self.bands:
            raise ValueError("bands background needs at least one band color")
        return self


class ObjectScript(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: Literal["box", "disc"] = "box"
    size: Tuple[int, int]                      # width, height
    color: RGB
    pattern: Literal["solid", "checker"] = "solid"
    alt_color: RGB = (0, 0, 0)
    cell: int = Field(default=6, ge=1)
    start: Tuple[float, float]                 # x, y of the top-left corner
    velocity: Tuple[float, float] = (0.0, 0.0)
    motion: Literal["linear", "bounce", "wrap"] = "linear"
    visible: Optional[Tuple[int, int]] = None  # [first, end) frames

    @model_validator(mode="after")
    def _check(self):
        if self.size[0] < 1 or self.size[1] < 1:
            raise ValueError(f"object size must be positive, got {self.size}")
        if self.visible is not None and self.visible[0] > self.visible[1]:
            raise ValueError(f"visibility interval is reversed: {self.visible}")
        return self

    def is_visible(self, t: int) -> bool:
        return self.visible is None or self.visible[0] <= t < self.visible[1]


class IlluminationChange(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frame: int = Field(ge=0)
    offset: int
    ramp_frames: int = Field(default=0, ge=0)

    def offset_at(self, t: int) -> float:
        if self.ramp_frames == 0:
            return float(self.offset) if t >= self.frame else 0.0
        progress = (t - self.frame + 1) / self.ramp_frames
        return self.offset * min(max(progress, 0.0), 1.0)


class SyntheticScene(BaseModel):
    model_config = ConfigDict(extra="forbid")

    width: int = Field(ge=2)
    height: int = Field(ge=2)
    frames: int = Field(default=100, ge=1)
    seed: int = 0
    noise_sigma: float = Field(default=0.0, ge=0.0)
    background: BackgroundSpec = Field(default_factory=BackgroundSpec)
    objects: List[ObjectScript] = Field(default_factory=list)
    illumination: List[IlluminationChange] = Field(default_factory=list)

    @classmethod
    def from_yaml(cls, source: Union[str, Path]) -> "SyntheticScene":
        """Parse a scene from a YAML file path or YAML text."""
        text = Path(source).read_text() if isinstance(source, Path) else source
        try:
            return cls.model_validate(yaml.safe_load(text))
        except (ValidationError, yaml.YAMLError) as e:
            raise InvalidSceneError(f"invalid scene spec: {e}") from e

    def illumination_offset(self, t: int) -> float:
        return sum(change.offset_at(t) for change in self.illumination)


def render_background(scene: SyntheticScene) -> ColorFrame:
    """The scene background without objects, illumination or noise."""
    spec = scene.background
    H, W = scene.height, scene.width
    if spec.kind == "solid":
        return np.full((H, W, 3), spec.color, dtype=np.uint8)
    if spec.kind == "bands":
        bg = np.empty((H, W, 3), dtype=np.uint8)
        edges = np.linspace(0, W, len(spec.bands) + 1).astype(int)
        for color, x0, x1 in zip(spec.bands, edges[:-1], edges[1:]):
            bg[:, x0:x1] = color
        return bg

    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.value_range
    coarse = rng.uniform(lo, hi, size=(H // spec.cell + 2, W // spec.cell + 2, 3)).astype(np.float32)
    smooth = cv2.resize(coarse, (W, H), interpolation=cv2.INTER_LINEAR)
    return np.clip(np.rint(smooth), lo, hi).astype(np.uint8)


def _axis_position(start: float, velocity: float, t: int, extent: int, frame: int, motion: str) -> int:
    s = start + velocity * t
    if motion == "wrap":
        return int(np.floor(s + 0.5)) % frame
    if motion == "bounce":
        span = frame - extent
        if span <= 0:
            return 0
        s = s % (2 * span)
        s = s if s <= span else 2 * span - s
    return int(np.floor(s + 0.5))


def object_footprint(obj: ObjectScript, t: int, width: int, height: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Rows, columns, shape mask and colors of an object at frame t.

    Raises:
        InvalidSceneError: a non-wrapping object leaves the frame
    """
    w, h = obj.size
    if w > width or h > height:
        raise InvalidSceneError(f"object {w}x{h} is larger than the {width}x{height} frame")
    x0 = _axis_position(obj.start[0], obj.velocity[0], t, w, width, obj.motion)
    y0 = _axis_position(obj.start[1], obj.velocity[1], t, h, height, obj.motion)
    if obj.motion != "wrap" and (x0 < 0 or y0 < 0 or x0 + w > width or y0 + h > height):
        raise InvalidSceneError(f"object at ({x0}, {y0}) size {w}x{h} leaves the frame at frame {t}")

    rows = (y0 + np.arange(h)) % height
    cols = (x0 + np.arange(w)) % width
    if obj.shape == "disc":
        yy, xx = np.mgrid[0:h, 0:w]
        mask = ((yy - (h - 1) / 2) / (h / 2)) ** 2 + ((xx - (w - 1) / 2) / (w / 2)) ** 2 <= 1.0
    else:
        mask = np.ones((h, w), dtype=bool)

    colors = np.empty((h, w, 3), dtype=np.int16)
    colors[:] = obj.color
    if obj.pattern == "checker":
        yy, xx = np.mgrid[0:h, 0:w]
        alternate = ((yy // obj.cell) + (xx // obj.cell)) % 2 == 1
        colors[alternate] = obj.alt_color
    return rows, cols, mask, colors


def generate_synthetic(scene: SyntheticScene, n_frames: Optional[int] = None,
                       seed: Optional[int] = None) -> Tuple[FrameSequence, ColorFrame]:
    """
    Render a scene.

    Args:
        scene: validated scene description
        n_frames: frame count (defaults to scene.frames)
        seed: noise seed (defaults to scene.seed)

    Returns:
        (frames, ground truth) where the ground truth is the background under
        the illumination of the last frame
    """
    n_frames = scene.frames if n_frames is None else n_frames
    seed = scene.seed if seed is None else seed
    if n_frames < 1:
        raise InvalidSceneError(f"frame count must be positive, got {n_frames}")

    background = render_background(scene).astype(np.int16)
    rng = np.random.default_rng(seed)
    frames = np.empty((n_frames, scene.height, scene.width, 3), dtype=np.uint8)

    for t in range(n_frames):
        img = background.copy()
        for obj in scene.objects:
            if not obj.is_visible(t):
                continue
            rows, cols, mask, colors = object_footprint(obj, t, scene.width, scene.height)
            region = img[np.ix_(rows, cols)]
            region[mask] = colors[mask]
            img[np.ix_(rows, cols)] = region

        img = img.astype(np.float64) + scene.illumination_offset(t)
        if scene.noise_sigma > 0:
            img += rng.normal(0.0, scene.noise_sigma, size=img.shape)
        frames[t] = np.clip(np.rint(img), 0, 255).astype(np.uint8)

    offset = scene.illumination_offset(n_frames - 1)
    truth = np.clip(np.rint(background + offset), 0, 255).astype(np.uint8)
    logger.debug(f"Rendered {n_frames} frames of {scene.width}x{scene.height} with {len(scene.objects)} objects")
    return FrameSequence(frames), truth
