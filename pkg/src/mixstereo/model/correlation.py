"""Row-wise all-pairs correlation pyramid and its windowed lookup."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from mixstereo.errors import DomainError
from mixstereo.kernels import Tensor, avg_pool_last, bilinear_sample_rows

Volume = npt.NDArray[np.float32]


@dataclass(frozen=True, eq=False)
class CorrelationPyramid:
    """Volumes indexed (row i, left column j, right column k).

    Level l pools level 0 along k by 2**l, so its last axis has ceil(W4 / 2**l) bins.
    """

    levels: tuple[Volume, ...]

    @property
    def num_levels(self) -> int:
        return len(self.levels)


def build_correlation_pyramid(
    f_left: Tensor, f_right: Tensor, levels: int = 4
) -> CorrelationPyramid:
    if f_left.shape != f_right.shape:
        raise DomainError(f"Feature shapes differ: {f_left.shape} vs {f_right.shape}")
    if f_left.shape[0] != 1:
        raise DomainError("Correlation is built for a single image pair (batch size 1)")
    if levels < 1:
        raise DomainError(f"Pyramid needs at least one level, got {levels}")
    channels = f_left.shape[1]
    left = f_left[0].transpose(1, 2, 0)  # (H, W, F)
    right = f_right[0].transpose(1, 0, 2)  # (H, F, W)
    level0 = (np.matmul(left, right) / np.float32(math.sqrt(channels))).astype(np.float32)
    pyramid = [level0] + [avg_pool_last(level0, 2**lvl) for lvl in range(1, levels)]
    return CorrelationPyramid(levels=tuple(pyramid))


def lookup(
    pyr: CorrelationPyramid, disp: Tensor, radius: int = 4, coarse_taps: bool = False
) -> Tensor:
    """Sample 2*radius+1 correlation values per level around each pixel's match.

    Tap delta at level l reads (j - d + delta) / 2**l, so taps sit one
    full-resolution column apart at every level. With ``coarse_taps`` the
    window is centred on (j - d) / 2**l and its taps are one level-l bin apart
    instead. Output channels are ordered level-major, offset ascending.
    """
    if radius < 0:
        raise DomainError(f"Lookup radius must be >= 0, got {radius}")
    _, _, h, w = disp.shape
    offsets = np.arange(-radius, radius + 1, dtype=np.float32)
    columns = np.arange(w, dtype=np.float32)[None, :]
    centre = columns - disp[0, 0]  # (H, W)
    out = []
    for lvl, volume in enumerate(pyr.levels):
        scale = np.float32(2**lvl)
        if coarse_taps:
            x = centre[..., None] / scale + offsets
        else:
            x = (centre[..., None] + offsets) / scale
        sampled = bilinear_sample_rows(volume, x)  # (H, W, K)
        out.append(sampled.transpose(2, 0, 1))
    return np.ascontiguousarray(np.concatenate(out, axis=0)[None], dtype=np.float32)
