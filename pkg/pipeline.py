"""End-to-end background initialization pipeline."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Optional, Tuple

from tqdm import tqdm

from config import Config, PipelineConfig
from background.clustering import cluster_all_pixels
from background.decision import BackgroundEstimate, estimate_background, single_frame_estimate
from detection.illumination import SubsequenceSelection, select_stable_subsequence
from detection.motion import motion_masks_for_subsequence
from detection.superpixel import segment
from imaging.core import FrameSequence
from models import RunStats
from storage.images import DebugDumper

logger = logging.getLogger(__name__)


class SPMDPipeline:
    """Superpixel motion detection background initialization.

    Stages, in order: stable-illumination subsequence selection, superpixel
    segmentation, motion masks, per-position candidate clustering and the
    final decision with color reconstruction.
    """

    def __init__(self, config: Optional[PipelineConfig] = None):
        self.config = config or PipelineConfig()

    @contextmanager
    def _stage(self, name: str, timings: Dict[str, float]):
        start = time.perf_counter()
        yield
        timings[name] = time.perf_counter() - start
        logger.info(f"Stage {name}: {timings[name]:.3f}s")

    def run(self, frames: FrameSequence, debug_dir: Optional[Path] = None) -> Tuple[BackgroundEstimate, RunStats]:
        """
        Estimate the background of a sequence.

        Args:
            frames: input sequence
            debug_dir: directory for intermediate dumps (masks, superpixel
                overlays, provenance map, stats)

        Returns:
            (BackgroundEstimate, RunStats)
        """
        cfg = self.config
        if debug_dir is None and cfg.debug_dumps:
            debug_dir = Path("spmd_debug")
        dumper = DebugDumper(debug_dir) if debug_dir is not None else None
        timings: Dict[str, float] = {}
        executor = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
        total_start = time.perf_counter()

        try:
            with self._stage("illumination", timings):
                if cfg.illumination_detection:
                    selection = select_stable_subsequence(frames, cfg.illumination_params())
                else:
                    selection = SubsequenceSelection(0, len(frames) - 1)
                sub = frames.subsequence(selection.start_index, selection.end_index)

            if len(sub) == 1:
                logger.info("Single-frame subsequence; returning it as the background")
                estimate = single_frame_estimate(sub[0], sub.gray[0])
            else:
                estimate = self._run_stages(sub, selection, timings, executor, dumper)
        finally:
            if executor is not None:
                executor.shutdown()

        stats = RunStats(
            frame_count=len(frames),
            start_index=selection.start_index,
            end_index=selection.end_index,
            boundaries=list(selection.boundaries),
            width=frames.width,
            height=frames.height,
            workers=cfg.workers,
            stage_seconds=timings,
            total_seconds=time.perf_counter() - total_start,
            fallback_pixels=estimate.fallback_count,
        )
        logger.info(f"Background estimated in {stats.total_seconds:.2f}s ({stats.fps:.1f} fps), "
                    f"{stats.fallback_pixels} fallback pixels")
        if dumper is not None:
            dumper.provenance(estimate.provenance)
            dumper.stats(stats.model_dump_json(indent=2))
        return estimate, stats

    def _run_stages(self, sub: FrameSequence, selection: SubsequenceSelection, timings: Dict[str, float],
                    executor: Optional[ThreadPoolExecutor], dumper: Optional[DebugDumper]) -> BackgroundEstimate:
        cfg = self.config
        N = len(sub)
        hide_progress = not Config.SPMD_PROGRESS

        with self._stage("superpixel", timings):
            if cfg.superpixel_dilation:
                params = cfg.slic_params()
                work = (lambda n: segment(sub[n], params))
                indices = range(N)
                mapped = executor.map(work, indices) if executor is not None else map(work, indices)
                labelings = list(tqdm(mapped, total=N, desc="Superpixels", disable=hide_progress))
            else:
                labelings = [None] * N

        with self._stage("motion", timings):
            pixel_masks = [] if dumper is not None else None
            masks = motion_masks_for_subsequence(sub, labelings, cfg.motion_params(), executor, pixel_masks)

        with self._stage("clustering", timings):
            grid = cluster_all_pixels(sub.gray, masks, cfg.cluster_params(), executor)

        with self._stage("decision", timings):
            estimate = estimate_background(sub, masks, grid, cfg.cluster_params(), executor=executor)

        if dumper is not None:
            offset = selection.start_index
            dumper.masks(pixel_masks, "pixel_masks", offset)
            dumper.masks(masks, "masks", offset)
            if cfg.superpixel_dilation:
                dumper.superpixels(sub, labelings, offset)
        return estimate


def run_spmd(frames: FrameSequence, config: Optional[PipelineConfig] = None,
             debug_dir: Optional[Path] = None) -> Tuple[BackgroundEstimate, RunStats]:
    """Run the full pipeline with the given configuration."""
    return SPMDPipeline(config).run(frames, debug_dir)
