"""Unified configuration for MixStereo.

This module centralizes the published constants (dataset sizes, replication
factors, schedule numbers) and the pydantic models every command is driven by.
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# ---------- Module-level defaults (used by cli.py) ----------
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_SEED = 0
DEFAULT_ITERS = 32
DEFAULT_PAD_MULTIPLE = 32
CATALOG_ENV_VAR = "MIXSTEREO_CATALOG"
DEFAULT_CATALOG_FILE = "catalog.json"

# ---------- File formats ----------
FORMAT_VERSION = 1
WEIGHTS_MAGIC = b"IRSW"
WEIGHTS_VERSION = 0x01
KITTI_DISP_SCALE = 1.0 / 256.0
INSTEREO2K_DISP_SCALE = 1.0 / 100.0
CRESTEREO_DISP_SCALE = 1.0 / 32.0

# ---------- Pre-training datasets: (type, #training frames, resolution h×w) ----------
PRETRAIN_DATASETS: dict[str, tuple[str, int, tuple[int, int]]] = {
    "Sceneflow": ("Synthetic", 70908, (540, 960)),
    "CreStereo": ("Synthetic", 200000, (1080, 1920)),
    "TartanAir": ("Synthetic", 306637, (480, 640)),
    "FallingThings": ("Synthetic", 61500, (540, 960)),
    "Sintel": ("Synthetic", 2128, (436, 1024)),
    "HR-VS": ("Synthetic", 780, (2056, 2464)),
    "InStereo2K": ("Realistic", 2010, (860, 1080)),
}

# ---------- Fine-tuning datasets (benchmark training splits) ----------
FINETUNE_DATASETS: dict[str, tuple[str, int, tuple[int, int]]] = {
    "KITTI-2015": ("Realistic", 200, (375, 1242)),
    "Middlebury": ("Realistic", 15, (1988, 2964)),
    "ETH3D": ("Realistic", 153, (458, 739)),
}

# ---------- Replication factors ----------
PRETRAIN_FACTORS: dict[str, int] = {
    "Sceneflow": 3,
    "CreStereo": 1,
    "TartanAir": 1,
    "FallingThings": 3,
    "Sintel": 10,
    "HR-VS": 25,
    "InStereo2K": 10,
}
FINETUNE_FACTORS: dict[str, int] = {
    "KITTI-2015": 1,
    "Middlebury": 1,
    "ETH3D": 10,
}

# ---------- Training schedule ----------
PRETRAIN_STEPS = 200_000
FINETUNE_STEPS = 30_000
BATCH_SIZE = 4
CROP_SIZE = (320, 704)
PRETRAIN_MIN_LR = 1e-4
FINETUNE_MIN_LR = 1e-5

# ---------- Evaluation ----------
DEFAULT_THRESHOLDS = (1.0, 2.0, 3.0)
KITTI_D1_RELATIVE = 0.05
MIDDLEBURY_RESOLUTIONS = {"half": 0.5, "quarter": 0.25}

# Dark-to-bright ramp; invalid pixels are drawn black, distinct from the first anchor.
COLORMAP_ANCHORS: tuple[tuple[int, int, int], ...] = (
    (0, 0, 4),
    (40, 11, 84),
    (101, 21, 110),
    (159, 42, 99),
    (212, 72, 66),
    (245, 125, 21),
    (252, 255, 164),
)

# ---------- Directory names ----------
DIR_CONFIGS = "configs"
USER_CONFIG_DIR = ".mixstereo"


class ArchitectureDescriptor(BaseModel):
    """Channel counts and loop sizes of the iterative stereo network.

    Defaults follow the standard RAFT-Stereo configuration (1/4 resolution
    features, three GRU levels). Tests shrink them.
    """

    model_config = ConfigDict(frozen=True)

    feature_channels: int = Field(default=256, ge=1)
    encoder_channels: tuple[int, int] = (64, 96)
    hidden_channels: int = Field(default=128, ge=2)
    gru_levels: int = Field(default=3, ge=1, le=3)
    corr_levels: int = Field(default=4, ge=1)
    corr_radius: int = Field(default=4, ge=0)
    # space lookup taps one pyramid bin apart at every level
    coarse_taps: bool = False
    motion_channels: int = Field(default=64, ge=1)
    head_channels: int = Field(default=256, ge=1)
    iters: int = Field(default=DEFAULT_ITERS, ge=0)

    @field_validator("encoder_channels")
    @classmethod
    def _positive_encoder(cls, v: tuple[int, int]) -> tuple[int, int]:
        if min(v) < 1:
            raise ValueError("encoder channels must be positive")
        return v

    @property
    def corr_channels(self) -> int:
        return self.corr_levels * (2 * self.corr_radius + 1)


class AugmentConfig(BaseModel):
    """Training-time augmentation parameters.

    Crop size is 320×704 (height×width). The remaining defaults are adopted from
    the RAFT-Stereo training code rather than specified independently.
    """

    crop_size: tuple[int, int] = CROP_SIZE
    scale_log2_range: tuple[float, float] = (-0.2, 0.4)
    stretch_prob: float = Field(default=0.8, ge=0.0, le=1.0)
    max_stretch: float = Field(default=0.2, ge=0.0)
    brightness_range: tuple[float, float] = (0.6, 1.4)
    contrast_range: tuple[float, float] = (0.6, 1.4)
    saturation_range: tuple[float, float] = (0.0, 1.4)
    asymmetric_prob: float = Field(default=0.2, ge=0.0, le=1.0)
    yjitter_max: int = Field(default=2, ge=0)
    eraser_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    eraser_size_range: tuple[int, int] = (50, 100)
    eraser_count_range: tuple[int, int] = (1, 2)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)

    @field_validator("crop_size")
    @classmethod
    def _positive_crop(cls, v: tuple[int, int]) -> tuple[int, int]:
        if min(v) < 1:
            raise ValueError("crop dimensions must be positive")
        return v

    @field_validator(
        "scale_log2_range",
        "brightness_range",
        "contrast_range",
        "saturation_range",
        "eraser_size_range",
        "eraser_count_range",
    )
    @classmethod
    def _ordered(cls, v: tuple[float, float]) -> tuple[float, float]:
        if v[0] > v[1]:
            raise ValueError(f"range lower bound exceeds upper bound: {v}")
        return v

    @field_validator("brightness_range", "contrast_range", "saturation_range")
    @classmethod
    def _non_negative_factor(cls, v: tuple[float, float]) -> tuple[float, float]:
        if v[0] < 0:
            raise ValueError("enhancement factors must be non-negative")
        return v

    @field_validator("eraser_size_range", "eraser_count_range")
    @classmethod
    def _positive_int_range(cls, v: tuple[int, int]) -> tuple[int, int]:
        if v[0] < 1:
            raise ValueError("eraser ranges must start at 1 or more")
        return v


class PhaseConfig(BaseModel):
    """One training phase of the two-phase plan."""

    name: str
    steps: int = Field(gt=0)
    batch_size: int = Field(gt=0)
    crop_size: tuple[int, int] = CROP_SIZE
    min_lr: float = Field(gt=0)
    policy: str

    @field_validator("crop_size")
    @classmethod
    def _positive_crop(cls, v: tuple[int, int]) -> tuple[int, int]:
        if min(v) < 1:
            raise ValueError("crop dimensions must be positive")
        return v

    @property
    def samples_consumed(self) -> int:
        return self.steps * self.batch_size


class PipelineConfig(BaseModel):
    """Self-describing configuration shared by all commands; CLI flags override it."""

    catalog: str = DEFAULT_CATALOG_FILE
    policy: str = "pretrain"
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    architecture: ArchitectureDescriptor = Field(default_factory=ArchitectureDescriptor)
    weights: str | None = None
    iters: int = Field(default=DEFAULT_ITERS, ge=0)
    output_dir: str = "."
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _iters_follow_architecture(self) -> PipelineConfig:
        if "iters" not in self.model_fields_set and "architecture" in self.model_fields_set:
            self.iters = self.architecture.iters
        return self

    def missing_paths(self, catalog_required: bool = True) -> list[str]:
        """Referenced files and directories that do not exist.

        An unset catalog falls back to the built-in one, so only an explicit
        catalog is required; commands that create it pass ``catalog_required=False``.
        """
        missing = []
        if catalog_required and "catalog" in self.model_fields_set and not Path(self.catalog).is_file():
            missing.append(self.catalog)
        if self.policy.endswith(".json") and not Path(self.policy).is_file():
            missing.append(self.policy)
        if self.weights is not None and not Path(self.weights).is_file():
            missing.append(self.weights)
        if not Path(self.output_dir).is_dir():
            missing.append(self.output_dir)
        return missing
