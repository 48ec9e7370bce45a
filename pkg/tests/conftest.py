"""Shared fixtures: random generators, rendered frames and scene specs."""
import os
from pathlib import Path

os.environ.setdefault("SPMD_PROGRESS", "false")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from imaging.core import FrameSequence, to_gray  # noqa: E402
from ingestion.synthetic import SyntheticScene, generate_synthetic, render_background  # noqa: E402

SCENES_DIR = Path(__file__).parent / "scenes"


def load_scene(name: str) -> SyntheticScene:
    return SyntheticScene.from_yaml(SCENES_DIR / f"{name}.yaml")


def gray_region_age(gt: np.ndarray, est: np.ndarray, region: np.ndarray) -> float:
    """Average gray error restricted to a boolean region."""
    diff = np.abs(to_gray(gt).astype(np.int32) - to_gray(est).astype(np.int32))
    return float(diff[region].mean())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def textured_frame():
    """200x144 smooth random texture with channel values in [40, 180]."""
    scene = SyntheticScene(width=200, height=144, background={"kind": "texture", "seed": 5})
    return render_background(scene)


@pytest.fixture
def static_sequence(textured_frame):
    return FrameSequence(np.repeat(textured_frame[None], 10, axis=0))


@pytest.fixture
def moving_box_sequence():
    """Checkered 20x20 box crossing a textured 200x144 background, 3 px per frame."""
    scene = SyntheticScene(
        width=200, height=144, frames=12,
        background={"kind": "texture", "seed": 9},
        objects=[{"size": [20, 20], "color": [255, 255, 255], "alt_color": [0, 0, 0],
                  "pattern": "checker", "cell": 3, "start": [20, 60], "velocity": [3, 0]}],
    )
    frames, truth = generate_synthetic(scene)
    return scene, frames, truth
