__all__ = [
    "Catalog",
    "DatasetDescriptor",
    "DisparityMap",
    "RegionMask",
    "SampleRef",
    "StereoSample",
    "ValidationReport",
    "decode_sintel_disparity",
    "default_catalog",
    "depth_to_disparity",
    "disparity_to_depth",
    "load_catalog",
    "read_kitti_disparity",
    "read_pfm",
    "save_catalog",
    "scan_dataset",
    "validate_sample",
    "write_kitti_disparity",
    "write_pfm",
]

from .catalog import Catalog, DatasetDescriptor, default_catalog, load_catalog, save_catalog
from .formats import (
    decode_sintel_disparity,
    depth_to_disparity,
    disparity_to_depth,
    read_kitti_disparity,
    read_pfm,
    write_kitti_disparity,
    write_pfm,
)
from .readers import scan_dataset
from .types import DisparityMap, RegionMask, SampleRef, StereoSample
from .validate import ValidationReport, validate_sample
