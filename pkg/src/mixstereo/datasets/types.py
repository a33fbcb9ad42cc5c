from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from mixstereo.errors import DomainError


@dataclass(frozen=True)
class DisparityMap:
    """Per-pixel disparity in pixels plus a validity mask.

    Invalid pixels carry value 0 and are excluded from every statistic; the mask,
    never a sentinel value, is the source of truth.
    """

    values: npt.NDArray[np.float32]
    valid: npt.NDArray[np.bool_]

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise DomainError(f"Disparity must be 2-D, got shape {self.values.shape}")
        if self.values.shape != self.valid.shape:
            raise DomainError(
                f"Disparity {self.values.shape} and mask {self.valid.shape} differ in shape"
            )

    @classmethod
    def from_values(
        cls, values: npt.ArrayLike, valid: npt.ArrayLike | None = None
    ) -> DisparityMap:
        """Build a map, marking non-finite values invalid and zeroing them."""
        v = np.array(values, dtype=np.float32)
        mask = np.isfinite(v)
        if valid is not None:
            mask &= np.asarray(valid, dtype=bool)
        v[~mask] = 0.0
        return cls(values=v, valid=mask)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def density(self) -> float:
        return float(self.valid.mean()) if self.valid.size else 0.0


@dataclass(frozen=True)
class RegionMask:
    """Foreground (True) / background (False) labels, from a KITTI object map."""

    foreground: npt.NDArray[np.bool_]

    @classmethod
    def from_object_map(cls, object_map: npt.ArrayLike) -> RegionMask:
        arr = np.asarray(object_map)
        if arr.ndim == 3:
            arr = arr[..., 0]
        return cls(foreground=arr > 0)

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.foreground.shape[0]), int(self.foreground.shape[1])


@dataclass(frozen=True)
class SampleRef:
    """Paths of one stereo sample on disk, as found by a dataset scan."""

    dataset: str
    frame_id: str
    left: Path
    right: Path
    disparity: Path | None = None
    pass_type: str | None = None
    extras: dict[str, Path] = field(default_factory=dict)


@dataclass(frozen=True)
class StereoSample:
    """A rectified 8-bit RGB pair with optional ground truth and region labels."""

    left: npt.NDArray[np.uint8]
    right: npt.NDArray[np.uint8]
    disparity: DisparityMap | None = None
    dataset: str = ""
    frame_id: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)
    regions: RegionMask | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.left.shape[0]), int(self.left.shape[1])
