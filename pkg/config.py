"""Configuration for the background initialization pipeline."""
import io
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import InvalidInputError
from background.clustering import ClusterParams
from detection.illumination import IlluminationParams
from detection.motion import MotionParams
from detection.superpixel import SlicParams

load_dotenv()


class Config:
    """Process-level settings from the environment."""

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Worker threads for frame- and row-parallel stages
    SPMD_WORKERS: int = int(os.getenv("SPMD_WORKERS", "1"))

    # Default pipeline config file used by the CLI when --config is absent
    SPMD_CONFIG: Optional[str] = os.getenv("SPMD_CONFIG") or None

    # tqdm progress bars
    SPMD_PROGRESS: bool = os.getenv("SPMD_PROGRESS", "true").lower() == "true"


class PipelineConfig(BaseModel):
    """Every tunable of the pipeline, stored as flat key=value text."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # Illumination change detection
    tau_h: float = Field(default=0.20, gt=0.0, lt=1.0)
    tau_eh: float = Field(default=0.10, gt=0.0, lt=1.0)
    illumination_detection: bool = True

    # Superpixels
    sigma_n: float = Field(default=20.0, ge=2.0)
    compactness: float = Field(default=10.0, gt=0.0)
    slic_max_iterations: int = Field(default=10, ge=1)

    # Motion masks
    blur_sigma: float = Field(default=1.0, gt=0.0)
    blur_radius: int = Field(default=2, ge=1)
    min_between_variance: float = Field(default=1.0, ge=0.0)
    min_peak_difference: float = Field(default=4.0, ge=0.0)
    superpixel_dilation: bool = True

    # Candidate clustering
    epsilon: float = Field(default=10.0, ge=1.0)
    min_pts: Optional[int] = Field(default=None, ge=2)
    min_pts_floor: int = Field(default=3, ge=2)
    min_pts_fraction: float = Field(default=0.02, ge=0.0, lt=1.0)

    workers: int = Field(default=Config.SPMD_WORKERS, ge=1)
    debug_dumps: bool = False

    def illumination_params(self) -> IlluminationParams:
        return IlluminationParams(self.tau_h, self.tau_eh)

    def slic_params(self) -> SlicParams:
        return SlicParams(self.sigma_n, self.compactness, self.slic_max_iterations)

    def motion_params(self) -> MotionParams:
        return MotionParams(self.blur_sigma, self.blur_radius, self.min_between_variance,
                            self.min_peak_difference, self.superpixel_dilation)

    def cluster_params(self) -> ClusterParams:
        return ClusterParams(self.epsilon, self.min_pts, self.min_pts_floor, self.min_pts_fraction)

    def to_text(self) -> str:
        """Serialize as key=value lines; unset optional keys are left out."""
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        values = {k: v for k, v in dotenv_values(stream=io.StringIO(text)).items() if v not in (None, "")}
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise InvalidInputError(f"invalid pipeline config: {e}") from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())
