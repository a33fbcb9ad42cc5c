"""Training-time augmentation of stereo samples.

Every transform takes an explicit ``numpy.random.Generator`` so a sample's
augmentation depends only on its seed. Ground-truth disparity is changed only
by ``spatial_scale`` (values scaled by s_x) and ``random_crop`` (a window of the
original values); colour and right-view transforms leave it untouched.
"""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np
import numpy.typing as npt
from PIL import Image, ImageEnhance
from scipy import ndimage

from mixstereo.config import AugmentConfig
from mixstereo.datasets.types import DisparityMap, RegionMask, StereoSample
from mixstereo.errors import DomainError

logger = logging.getLogger("mixstereo")

Image8 = npt.NDArray[np.uint8]
# the scaled image must exceed the crop by this margin on both axes
SCALE_MARGIN = 8


# ---------- Photometric ----------


def _enhance(img: Image.Image, factors: tuple[float, float, float]) -> Image.Image:
    brightness, contrast, saturation = factors
    for enhancer, factor in (
        (ImageEnhance.Brightness, brightness),
        (ImageEnhance.Contrast, contrast),
        (ImageEnhance.Color, saturation),
    ):
        if factor != 1.0:
            img = enhancer(img).enhance(factor)
    return img


def _draw_colour(cfg: AugmentConfig, rng: np.random.Generator) -> tuple[float, float, float]:
    return (
        float(rng.uniform(*cfg.brightness_range)),
        float(rng.uniform(*cfg.contrast_range)),
        float(rng.uniform(*cfg.saturation_range)),
    )


def adjust_colour(image: Image8, factors: tuple[float, float, float]) -> Image8:
    """Apply brightness, contrast and saturation factors (1.0 leaves a channel as is)."""
    out = _enhance(Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)), factors)
    return np.asarray(out, dtype=np.uint8)


def photometric_jitter(
    sample: StereoSample, cfg: AugmentConfig, rng: np.random.Generator
) -> StereoSample:
    """Colour jitter; with probability ``asymmetric_prob`` each eye draws its own factors."""
    left_factors = _draw_colour(cfg, rng)
    right_factors = _draw_colour(cfg, rng) if rng.random() < cfg.asymmetric_prob else left_factors
    return replace(
        sample,
        left=adjust_colour(sample.left, left_factors),
        right=adjust_colour(sample.right, right_factors),
    )


# ---------- Right view ----------


def erase_right(sample: StereoSample, cfg: AugmentConfig, rng: np.random.Generator) -> StereoSample:
    """Fill random rectangles of the right image with its mean colour."""
    if rng.random() >= cfg.eraser_prob:
        return sample
    right = sample.right.copy()
    h, w = right.shape[:2]
    mean_colour = np.rint(sample.right.reshape(-1, right.shape[2]).mean(axis=0)).astype(np.uint8)
    lo, hi = cfg.eraser_count_range
    for _ in range(int(rng.integers(lo, hi + 1))):
        size_lo, size_hi = cfg.eraser_size_range
        dx = min(int(rng.integers(size_lo, size_hi + 1)), w)
        dy = min(int(rng.integers(size_lo, size_hi + 1)), h)
        x0 = int(rng.integers(0, w - dx + 1))
        y0 = int(rng.integers(0, h - dy + 1))
        right[y0 : y0 + dy, x0 : x0 + dx] = mean_colour
    return replace(sample, right=right)


def jitter_right(sample: StereoSample, shift: int) -> StereoSample:
    """Shift right-image rows down by ``shift`` (negative: up), replicating the edge row."""
    if shift == 0:
        return sample
    h = sample.right.shape[0]
    rows = np.clip(np.arange(h) - shift, 0, h - 1)
    return replace(sample, right=np.ascontiguousarray(sample.right[rows]))


def right_view_perturb(
    sample: StereoSample, cfg: AugmentConfig, rng: np.random.Generator
) -> StereoSample:
    sample = erase_right(sample, cfg, rng)
    shift = int(rng.integers(-cfg.yjitter_max, cfg.yjitter_max + 1)) if cfg.yjitter_max else 0
    return jitter_right(sample, shift)


# ---------- Spatial ----------


def draw_scale(
    shape: tuple[int, int], cfg: AugmentConfig, rng: np.random.Generator
) -> tuple[float, float]:
    """Random (s_x, s_y) that keeps the scaled image at least crop + margin on each axis."""
    h, w = shape
    crop_h, crop_w = cfg.crop_size
    min_scale = max((crop_h + SCALE_MARGIN) / h, (crop_w + SCALE_MARGIN) / w)
    scale = 2.0 ** rng.uniform(*cfg.scale_log2_range)
    s_x = s_y = scale
    if rng.random() < cfg.stretch_prob:
        s_x *= 2.0 ** rng.uniform(-cfg.max_stretch, cfg.max_stretch)
        s_y *= 2.0 ** rng.uniform(-cfg.max_stretch, cfg.max_stretch)
    return max(s_x, min_scale), max(s_y, min_scale)


def _grid(out_len: int, in_len: int) -> npt.NDArray[np.float64]:
    # pixel centres of the output mapped back onto the input
    return (np.arange(out_len) + 0.5) * (in_len / out_len) - 0.5


def _resample(
    plane: npt.NDArray[np.float64], coords: npt.NDArray[np.float64], order: int
) -> npt.NDArray[np.float64]:
    return ndimage.map_coordinates(plane, coords, order=order, mode="nearest", output=np.float64)


def spatial_scale(
    sample: StereoSample, s_x: float, s_y: float, rng: np.random.Generator | None = None
) -> StereoSample:
    """Resize both views and the ground truth; disparity values are multiplied by ``s_x``.

    Images and disparity are resampled bilinearly (disparity normalized by the
    interpolated validity so invalid pixels never bleed in); the mask is
    resampled nearest-neighbour.
    """
    if s_x <= 0 or s_y <= 0:
        raise DomainError(f"Scale factors must be positive, got {s_x}, {s_y}")
    h, w = sample.shape
    out_h = max(1, round(h * s_y))
    out_w = max(1, round(w * s_x))
    if (out_h, out_w) == (h, w) and s_x == 1.0:
        return sample
    yy, xx = np.meshgrid(_grid(out_h, h), _grid(out_w, w), indexing="ij")
    coords = np.stack([yy, xx])

    def resize_image(image: Image8) -> Image8:
        channels = [_resample(image[..., c].astype(np.float64), coords, 1) for c in range(3)]
        return np.clip(np.rint(np.stack(channels, axis=-1)), 0, 255).astype(np.uint8)

    disparity = sample.disparity
    if disparity is not None:
        valid = disparity.valid.astype(np.float64)
        weight = _resample(valid, coords, 1)
        total = _resample(np.where(disparity.valid, disparity.values, 0.0), coords, 1)
        nearest = _resample(valid, coords, 0) > 0.5
        keep = nearest & (weight > 0)
        values = np.zeros((out_h, out_w), dtype=np.float64)
        np.divide(total, weight, out=values, where=keep)
        disparity = DisparityMap(values=(values * s_x).astype(np.float32), valid=keep)

    regions = sample.regions
    if regions is not None:
        regions = RegionMask(_resample(regions.foreground.astype(np.float64), coords, 0) > 0.5)

    return replace(
        sample,
        left=resize_image(sample.left),
        right=resize_image(sample.right),
        disparity=disparity,
        regions=regions,
    )


def random_crop(sample: StereoSample, cfg: AugmentConfig, rng: np.random.Generator) -> StereoSample:
    """Cut the same ``cfg.crop_size`` window from both views and the ground truth.

    Inputs smaller than the crop are first reflect-padded at the bottom/right;
    padded ground truth is invalid.
    """
    crop_h, crop_w = cfg.crop_size
    h, w = sample.shape
    pad_h, pad_w = max(0, crop_h - h), max(0, crop_w - w)
    left, right, disparity = sample.left, sample.right, sample.disparity
    if pad_h or pad_w:
        logger.debug(f"Padding {h}x{w} sample to fit {crop_h}x{crop_w} crop")
        pads = ((0, pad_h), (0, pad_w), (0, 0))
        left = np.pad(left, pads, mode="reflect" if min(h, w) > 1 else "edge")
        right = np.pad(right, pads, mode="reflect" if min(h, w) > 1 else "edge")
        if disparity is not None:
            disparity = DisparityMap(
                values=np.pad(disparity.values, pads[:2]),
                valid=np.pad(disparity.valid, pads[:2]),
            )
    full_h, full_w = left.shape[:2]
    y0 = int(rng.integers(0, full_h - crop_h + 1))
    x0 = int(rng.integers(0, full_w - crop_w + 1))
    rows, cols = slice(y0, y0 + crop_h), slice(x0, x0 + crop_w)
    if disparity is not None:
        disparity = DisparityMap(
            values=np.ascontiguousarray(disparity.values[rows, cols]),
            valid=np.ascontiguousarray(disparity.valid[rows, cols]),
        )
    regions = sample.regions
    if regions is not None:
        foreground = np.pad(regions.foreground, ((0, pad_h), (0, pad_w)))
        regions = RegionMask(np.ascontiguousarray(foreground[rows, cols]))
    return replace(
        sample,
        left=np.ascontiguousarray(left[rows, cols]),
        right=np.ascontiguousarray(right[rows, cols]),
        disparity=disparity,
        regions=regions,
    )


def augment(sample: StereoSample, cfg: AugmentConfig, rng: np.random.Generator) -> StereoSample:
    """Full pipeline: colour jitter, right-view erase, scale, crop, right-view vertical jitter."""
    sample = photometric_jitter(sample, cfg, rng)
    sample = erase_right(sample, cfg, rng)
    s_x, s_y = draw_scale(sample.shape, cfg, rng)
    sample = spatial_scale(sample, s_x, s_y, rng)
    sample = random_crop(sample, cfg, rng)
    shift = int(rng.integers(-cfg.yjitter_max, cfg.yjitter_max + 1)) if cfg.yjitter_max else 0
    out = jitter_right(sample, shift)
    logger.debug(
        f"Augmented {sample.frame_id or 'sample'}: scale ({s_x:.3f}, {s_y:.3f}), y-jitter {shift}"
    )
    return out

