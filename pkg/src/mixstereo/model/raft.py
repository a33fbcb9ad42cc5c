"""End-to-end iterative stereo inference."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from mixstereo.config import DEFAULT_PAD_MULTIPLE
from mixstereo.datasets.types import DisparityMap
from mixstereo.errors import DomainError
from mixstereo.kernels import Tensor
from mixstereo.model.correlation import build_correlation_pyramid, lookup
from mixstereo.model.encoder import context_features, extract_features, image_to_tensor
from mixstereo.model.update import gru_update, mask_logits
from mixstereo.model.upsample import convex_upsample
from mixstereo.model.weights import ModelWeights

logger = logging.getLogger("mixstereo")


@dataclass(frozen=True)
class PadRecord:
    """Original size of a padded image and the rows/columns added bottom/right."""

    height: int
    width: int
    pad_h: int
    pad_w: int


def pad_to_multiple(image: Tensor, multiple: int = DEFAULT_PAD_MULTIPLE) -> tuple[Tensor, PadRecord]:
    """Edge-replicate bottom/right so height and width become multiples of ``multiple``."""
    if multiple < 1:
        raise DomainError(f"Padding multiple must be >= 1, got {multiple}")
    h, w = image.shape[2:]
    pad_h = math.ceil(h / multiple) * multiple - h
    pad_w = math.ceil(w / multiple) * multiple - w
    record = PadRecord(height=h, width=w, pad_h=pad_h, pad_w=pad_w)
    if pad_h == 0 and pad_w == 0:
        return image, record
    padded = np.pad(image, ((0, 0), (0, 0), (0, pad_h), (0, pad_w)), mode="edge")
    return np.ascontiguousarray(padded, dtype=np.float32), record


def crop_to_record(tensor: Tensor, record: PadRecord) -> Tensor:
    return np.ascontiguousarray(tensor[:, :, : record.height, : record.width])


def infer(
    left: npt.ArrayLike,
    right: npt.ArrayLike,
    weights: ModelWeights,
    iters: int | None = None,
) -> DisparityMap:
    """Estimate left-view disparity for a rectified 8-bit image pair.

    Deterministic in (inputs, weights, iters). ``iters`` defaults to the
    architecture's iteration count.
    """
    left_arr = np.asarray(left)
    right_arr = np.asarray(right)
    if left_arr.shape != right_arr.shape:
        raise DomainError(f"Left {left_arr.shape} and right {right_arr.shape} dimensions differ")
    arch = weights.arch
    iters = arch.iters if iters is None else iters
    if iters < 0:
        raise DomainError(f"Iteration count must be >= 0, got {iters}")

    started = time.perf_counter()
    left_t, record = pad_to_multiple(image_to_tensor(left_arr))
    right_t, _ = pad_to_multiple(image_to_tensor(right_arr))

    f_left, f_right = extract_features(left_t, right_t, weights)
    pyramid = build_correlation_pyramid(f_left, f_right, levels=arch.corr_levels)
    hidden, context = context_features(left_t, weights)

    disp = np.zeros((1, 1) + f_left.shape[2:], dtype=np.float32)
    for itr in range(iters):
        corr = lookup(pyramid, disp, radius=arch.corr_radius, coarse_taps=arch.coarse_taps)
        hidden, delta = gru_update(hidden, context, corr, disp, weights)
        disp = (disp + delta).astype(np.float32)
        logger.debug(f"Iteration {itr + 1}/{iters}: mean |delta| {float(np.abs(delta).mean()):.4f}")

    full = convex_upsample(disp, mask_logits(hidden, weights))
    out = crop_to_record(full, record)
    logger.info(
        f"Inferred {record.height}x{record.width} disparity in {iters} iterations "
        f"({time.perf_counter() - started:.2f}s)"
    )
    return DisparityMap.from_values(out[0, 0])
