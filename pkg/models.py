"""Run statistics reported by the pipeline."""
from typing import Dict, List

from pydantic import BaseModel, Field, computed_field

STAGES = ("illumination", "superpixel", "motion", "clustering", "decision")


class RunStats(BaseModel):
    """Timing and bookkeeping of one pipeline run."""
    frame_count: int
    start_index: int
    end_index: int
    boundaries: List[int] = Field(default_factory=list)
    width: int
    height: int
    workers: int = 1
    stage_seconds: Dict[str, float] = Field(default_factory=dict)
    total_seconds: float = 0.0
    fallback_pixels: int = 0

    @computed_field
    @property
    def subsequence_length(self) -> int:
        return self.end_index - self.start_index + 1

    @computed_field
    @property
    def fps(self) -> float:
        """Input frames processed per second of wall time (0 when untimed)."""
        return self.frame_count / self.total_seconds if self.total_seconds > 0 else 0.0

    def stage_fps(self, stage: str) -> float:
        seconds = self.stage_seconds.get(stage, 0.0)
        return self.frame_count / seconds if seconds > 0 else 0.0

    def summary(self) -> str:
        lines = [f"{self.width}x{self.height}, {self.frame_count} frames "
                 f"(subsequence {self.start_index}..{self.end_index}), {self.workers} worker(s)"]
        for stage in STAGES:
            if stage in self.stage_seconds:
                lines.append(f"  {stage:<13}{self.stage_seconds[stage]:9.3f} s {self.stage_fps(stage):10.1f} fps")
        lines.append(f"  {'total':<13}{self.total_seconds:9.3f} s {self.fps:10.1f} fps")
        lines.append(f"  fallback pixels: {self.fallback_pixels}")
        return "\n".join(lines)
