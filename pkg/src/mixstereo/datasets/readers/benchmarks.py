"""Readers for the fine-tuning / evaluation benchmarks."""

from __future__ import annotations

import logging

from mixstereo.datasets.catalog import DatasetDescriptor
from mixstereo.datasets.formats import read_disparity, read_region_mask
from mixstereo.datasets.readers.base import DatasetReader, SceneFolderReader, frame_id
from mixstereo.datasets.readers.registry import register
from mixstereo.datasets.types import DisparityMap, RegionMask, SampleRef

logger = logging.getLogger("mixstereo")


class KittiReader(DatasetReader):
    """KITTI-2015 ``image_2`` / ``image_3`` frame-10 pairs with ``disp_occ_0`` ground truth.

    Frames without ground truth (the testing split) are not samples.
    """

    kind = "kitti"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("image_2/*_10.png"):
            base = left.parent.parent
            disparity = base / "disp_occ_0" / left.name
            if not disparity.is_file():
                logger.debug(f"Skipping {left}: no ground truth")
                continue
            right = base / "image_3" / left.name
            if not self.pair_or_skip(left, right):
                continue
            extras = {}
            obj_map = base / "obj_map" / left.name
            if obj_map.is_file():
                extras["obj_map"] = obj_map
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left),
                    left=left,
                    right=right,
                    disparity=disparity,
                    extras=extras,
                )
            )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        return read_disparity(ref.disparity)

    def read_regions(self, ref: SampleRef) -> RegionMask | None:
        obj_map = ref.extras.get("obj_map")
        return None if obj_map is None else read_region_mask(obj_map)


class MiddleburyReader(SceneFolderReader):
    kind = "middlebury"


class Eth3dReader(SceneFolderReader):
    kind = "eth3d"
    disparity_names = ("disp0GT.pfm",)


register("kitti", KittiReader)
register("middlebury", MiddleburyReader)
register("eth3d", Eth3dReader)
