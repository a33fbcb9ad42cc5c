from __future__ import annotations

import numpy as np

from mixstereo.errors import DomainError
from mixstereo.kernels import Tensor, softmax_channels

FACTOR = 4
NEIGHBOURS = 9


def convex_upsample(disp: Tensor, mask_logits: Tensor) -> Tensor:
    """Upsample a 1/4 resolution field to full resolution by convex combination.

    Each full-resolution pixel is a softmax-weighted mix of the 3x3 coarse
    neighbourhood of its parent cell, scaled by 4. Mask channel ``k*16 + dy*4 + dx``
    weighs neighbour ``k`` (row-major over the 3x3 window) for sub-pixel (dy, dx).
    Borders replicate the edge so every neighbour is a real coarse value.
    """
    _, _, h, w = disp.shape
    expected = NEIGHBOURS * FACTOR * FACTOR
    if mask_logits.shape[1] != expected:
        raise DomainError(f"Mask needs {expected} channels, got {mask_logits.shape[1]}")
    if mask_logits.shape[2:] != (h, w):
        raise DomainError(f"Mask grid {mask_logits.shape[2:]} differs from field {(h, w)}")

    weights = softmax_channels(mask_logits.reshape(1, NEIGHBOURS, FACTOR * FACTOR * h, w))
    weights = weights.reshape(NEIGHBOURS, FACTOR, FACTOR, h, w)

    padded = np.pad(np.float32(FACTOR) * disp[0, 0], 1, mode="edge")
    neighbours = np.stack(
        [padded[ky : ky + h, kx : kx + w] for ky in range(3) for kx in range(3)]
    )  # (9, H, W)
    up = np.einsum("kyxhw,khw->yxhw", weights, neighbours)
    out = up.transpose(2, 0, 3, 1).reshape(FACTOR * h, FACTOR * w)
    return np.ascontiguousarray(out[None, None], dtype=np.float32)
