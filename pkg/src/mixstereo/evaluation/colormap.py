from __future__ import annotations

import numpy as np
import numpy.typing as npt

from mixstereo.config import COLORMAP_ANCHORS
from mixstereo.datasets.types import DisparityMap


def colorize_disparity(
    disparity: DisparityMap, max_disparity: float | None = None
) -> npt.NDArray[np.uint8]:
    """Map valid disparities in [0, max] onto the anchor ramp; invalid pixels are black.

    ``max_disparity`` defaults to the largest valid value in the map.
    """
    rgb = np.zeros(disparity.shape + (3,), dtype=np.uint8)
    if not disparity.valid.any():
        return rgb
    values = disparity.values[disparity.valid].astype(np.float64)
    top = float(values.max()) if max_disparity is None else float(max_disparity)
    t = np.clip(values / top, 0.0, 1.0) if top > 0 else np.zeros_like(values)
    anchors = np.asarray(COLORMAP_ANCHORS, dtype=np.float64)
    stops = np.linspace(0.0, 1.0, len(anchors))
    colours = np.stack([np.interp(t, stops, anchors[:, c]) for c in range(3)], axis=-1)
    rgb[disparity.valid] = np.clip(np.rint(colours), 0, 255).astype(np.uint8)
    return rgb
