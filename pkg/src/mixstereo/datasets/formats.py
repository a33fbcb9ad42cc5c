"""Disparity and image file formats: PFM, 16-bit PNG, Sintel RGB packing, depth."""

from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np
import numpy.typing as npt
from PIL import Image, UnidentifiedImageError

from mixstereo.config import KITTI_DISP_SCALE
from mixstereo.datasets.types import DisparityMap, RegionMask
from mixstereo.errors import DomainError, FormatError

_PFM_HEADER = re.compile(rb"^(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")
_PNG16_MODES = ("I;16", "I;16B", "I;16L", "I")
_U16_MAX = 65535

# ---------- PFM ----------


def read_pfm(data: bytes) -> DisparityMap:
    """Decode a PFM payload; rows are stored bottom-up, a negative scale means little-endian.

    Colour ``PF`` files keep their first channel.
    """
    match = _PFM_HEADER.match(data[:256])
    if match is None:
        raise FormatError(f"Not a PFM payload (header {data[:16]!r})")
    magic, width, height, scale_text = match.groups()
    width, height = int(width), int(height)
    if width == 0 or height == 0:
        raise FormatError(f"PFM has zero dimensions: {width}x{height}")
    try:
        scale = float(scale_text)
    except ValueError as e:
        raise FormatError(f"PFM scale is not a number: {scale_text!r}") from e
    channels = 3 if magic == b"PF" else 1
    count = width * height * channels
    offset = match.end()
    if len(data) - offset < 4 * count:
        raise FormatError(
            f"PFM payload truncated: need {4 * count} bytes, have {len(data) - offset}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    values = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    values = values.reshape(height, width, channels)[..., 0]
    return DisparityMap.from_values(np.flipud(values).astype(np.float32))


def write_pfm(disparity: DisparityMap) -> bytes:
    """Encode as little-endian grayscale PFM; invalid pixels are written as +inf."""
    if disparity.height == 0 or disparity.width == 0:
        raise DomainError("Cannot write a PFM with zero dimensions")
    values = np.where(disparity.valid, disparity.values, np.float32(np.inf))
    header = f"Pf\n{disparity.width} {disparity.height}\n-1.0\n".encode("ascii")
    return header + np.flipud(values).astype("<f4").tobytes()


# ---------- 16-bit PNG ----------


def read_png16(data: bytes, scale: float = KITTI_DISP_SCALE) -> DisparityMap:
    """Decode a single-channel 16-bit PNG as ``stored * scale``; stored 0 is invalid."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.mode not in _PNG16_MODES:
                raise FormatError(f"Expected a 16-bit single-channel PNG, got mode {img.mode}")
            stored = np.asarray(img).astype(np.int64)
    except UnidentifiedImageError as e:
        raise FormatError(f"Not a readable image: {e}") from e
    if stored.ndim != 2:
        raise FormatError(f"Expected a single-channel PNG, got shape {stored.shape}")
    if stored.size and (stored.min() < 0 or stored.max() > _U16_MAX):
        raise FormatError("PNG values exceed the 16-bit range")
    valid = stored > 0
    values = np.where(valid, stored * scale, 0.0).astype(np.float32)
    return DisparityMap(values=values, valid=valid)


def write_png16(disparity: DisparityMap, scale: float = KITTI_DISP_SCALE) -> bytes:
    """Encode valid pixels as ``round(d / scale)`` clipped to [1, 65535]; invalid as 0."""
    if scale <= 0:
        raise DomainError(f"PNG disparity scale must be positive, got {scale}")
    stored = np.clip(np.rint(disparity.values.astype(np.float64) / scale), 1, _U16_MAX)
    stored = np.where(disparity.valid, stored, 0).astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(stored).save(buf, format="PNG")
    return buf.getvalue()


def read_kitti_disparity(data: bytes) -> DisparityMap:
    return read_png16(data, KITTI_DISP_SCALE)


def write_kitti_disparity(disparity: DisparityMap) -> bytes:
    return write_png16(disparity, KITTI_DISP_SCALE)


# ---------- Sintel ----------


def decode_sintel_disparity(rgb: npt.ArrayLike) -> DisparityMap:
    """Unpack Sintel's RGB-encoded disparity: d = 4R + G/64 + B/16384."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError(f"Sintel disparity must be an RGB image, got shape {arr.shape}")
    r, g, b = (arr[..., i].astype(np.float64) for i in range(3))
    values = 4.0 * r + g / 64.0 + b / 16384.0
    return DisparityMap(values=values.astype(np.float32), valid=np.ones(arr.shape[:2], dtype=bool))


# ---------- Depth ----------


def _check_camera(fx: float, baseline: float) -> None:
    if fx <= 0 or baseline <= 0:
        raise DomainError(f"Focal length and baseline must be positive, got {fx}, {baseline}")


def depth_to_disparity(depth: npt.ArrayLike, fx: float, baseline: float) -> DisparityMap:
    """Pinhole conversion d = fx * baseline / z; non-positive or non-finite depth is invalid."""
    _check_camera(fx, baseline)
    z = np.asarray(depth, dtype=np.float64)
    valid = np.isfinite(z) & (z > 0)
    values = np.zeros(z.shape, dtype=np.float64)
    np.divide(fx * baseline, z, out=values, where=valid)
    return DisparityMap(values=values.astype(np.float32), valid=valid)


def disparity_to_depth(
    disparity: DisparityMap, fx: float, baseline: float
) -> npt.NDArray[np.float32]:
    """Inverse of ``depth_to_disparity``; pixels without positive valid disparity get +inf."""
    _check_camera(fx, baseline)
    usable = disparity.valid & (disparity.values > 0)
    depth = np.full(disparity.shape, np.inf, dtype=np.float64)
    np.divide(fx * baseline, disparity.values.astype(np.float64), out=depth, where=usable)
    return depth.astype(np.float32)


# ---------- Files ----------


def read_image(path: str | Path) -> npt.NDArray[np.uint8]:
    """Load an image as 8-bit RGB (HxWx3)."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise FormatError(f"Unreadable image: {path}") from e


def write_image(path: str | Path, rgb: npt.NDArray[np.uint8]) -> None:
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(path, format="PNG")


def read_region_mask(path: str | Path) -> RegionMask:
    """KITTI object map: any non-zero pixel is foreground."""
    try:
        with Image.open(path) as img:
            return RegionMask.from_object_map(np.asarray(img))
    except UnidentifiedImageError as e:
        raise FormatError(f"Unreadable object map: {path}") from e


def read_disparity(path: str | Path, scale: float = KITTI_DISP_SCALE) -> DisparityMap:
    """Load a disparity file by extension: ``.pfm`` or 16-bit ``.png`` with ``scale``."""
    p = Path(path)
    data = p.read_bytes()
    try:
        if p.suffix.lower() == ".pfm":
            return read_pfm(data)
        if p.suffix.lower() == ".png":
            return read_png16(data, scale)
    except FormatError as e:
        raise FormatError(f"{p}: {e}") from e
    raise FormatError(f"Unsupported disparity file type: {p}")


def write_disparity(path: str | Path, disparity: DisparityMap) -> None:
    p = Path(path)
    if p.suffix.lower() == ".png":
        p.write_bytes(write_kitti_disparity(disparity))
    else:
        p.write_bytes(write_pfm(disparity))
