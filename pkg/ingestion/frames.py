"""Load frame sequences from image directories."""
from pathlib import Path
from typing import List
import logging

import numpy as np
from PIL import Image, UnidentifiedImageError
from tqdm import tqdm

from config import Config
from errors import DimensionMismatchError, EmptySequenceError, FrameDecodeError, InvalidInputError
from imaging.core import ColorFrame, FrameSequence

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def load_frame(path: Path) -> ColorFrame:
    """Decode one image file to an (H, W, 3) uint8 RGB array."""
    try:
        with Image.open(path) as img:
            return np.array(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as e:
        raise FrameDecodeError(f"cannot decode {path.name}: {e}") from e


def list_frame_files(path: Path) -> List[Path]:
    """Image files of a sequence directory in name order.

    A directory with an input/ subdirectory (SBMnet layout) is read from there.
    """
    path = Path(path)
    if not path.is_dir():
        raise InvalidInputError(f"{path} is not a directory")
    if (path / "input").is_dir():
        path = path / "input"
    return sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def load_sequence(path: Path) -> FrameSequence:
    """
    Load every frame of a sequence directory.

    Args:
        path: directory of PNG/JPEG frames, or an SBMnet sequence directory

    Returns:
        FrameSequence in lexicographic file-name order
    """
    files = list_frame_files(path)
    if not files:
        raise EmptySequenceError(f"no PNG or JPEG frames in {path}")

    frames = []
    for file in tqdm(files, desc="Loading frames", disable=not Config.SPMD_PROGRESS):
        frame = load_frame(file)
        if frames and frame.shape != frames[0].shape:
            raise DimensionMismatchError(
                f"{file.name} is {frame.shape[1]}x{frame.shape[0]}, "
                f"expected {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
        frames.append(frame)

    logger.info(f"Loaded {len(frames)} frames ({frames[0].shape[1]}x{frames[0].shape[0]}) from {path}")
    return FrameSequence(np.stack(frames), tuple(f.name for f in files))
