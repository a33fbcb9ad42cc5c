from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import ClassVar

from mixstereo.datasets.catalog import DatasetDescriptor
from mixstereo.datasets.formats import read_disparity, read_image
from mixstereo.datasets.types import DisparityMap, RegionMask, SampleRef, StereoSample
from mixstereo.errors import DomainError

logger = logging.getLogger("mixstereo")


class DatasetReader(ABC):
    """Base class for readers that know one dataset's on-disk layout."""

    kind: ClassVar[str] = ""

    @abstractmethod
    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        """Enumerate samples under ``descriptor.root`` in lexicographic frame-id order."""
        pass

    @abstractmethod
    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        """Load the ground truth of ``ref``, or None when the sample has none."""
        pass

    def read_regions(self, ref: SampleRef) -> RegionMask | None:
        """Foreground/background labels of ``ref``; most datasets have none."""
        return None

    def load(self, ref: SampleRef, descriptor: DatasetDescriptor) -> StereoSample:
        metadata: dict[str, object] = {}
        if ref.pass_type:
            metadata["pass"] = ref.pass_type
        return StereoSample(
            left=read_image(ref.left),
            right=read_image(ref.right),
            disparity=self.read_disparity(ref, descriptor),
            dataset=ref.dataset,
            frame_id=ref.frame_id,
            metadata=metadata,
            regions=self.read_regions(ref),
        )

    # ---------- helpers shared by concrete readers ----------

    @staticmethod
    def root_of(descriptor: DatasetDescriptor) -> Path:
        if not descriptor.root:
            raise DomainError(f"Dataset {descriptor.name} has no root path")
        root = Path(descriptor.root).expanduser()
        if not root.is_dir():
            raise FileNotFoundError(f"Dataset root not found: {root}")
        return root

    @staticmethod
    def ordered(refs: list[SampleRef]) -> list[SampleRef]:
        return sorted(refs, key=lambda r: r.frame_id)

    @staticmethod
    def pair_or_skip(left: Path, right: Path) -> bool:
        if right.is_file():
            return True
        logger.warning(f"Skipping {left}: missing right view {right}")
        return False


def frame_id(root: Path, path: Path) -> str:
    return path.relative_to(root).as_posix()


class SceneFolderReader(DatasetReader):
    """One scene per directory holding ``im0.png``, ``im1.png`` and a PFM ground truth."""

    disparity_names: ClassVar[tuple[str, ...]] = ("disp0GT.pfm", "disp0.pfm")

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("im0.png"):
            right = left.with_name("im1.png")
            if not self.pair_or_skip(left, right):
                continue
            disparity = next(
                (left.with_name(n) for n in self.disparity_names if left.with_name(n).is_file()),
                None,
            )
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left.parent),
                    left=left,
                    right=right,
                    disparity=disparity,
                )
            )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        return read_disparity(ref.disparity)
