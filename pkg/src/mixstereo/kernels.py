"""Dense float32 kernels the stereo network is built on.

Tensors are rank-4 ``numpy`` arrays in (n, c, h, w) order. Every kernel is a pure
function: inputs are never modified and results are freshly allocated.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from mixstereo.errors import DomainError

Tensor = npt.NDArray[np.float32]
Activation = Literal["relu", "sigmoid", "tanh"]


def as_tensor(array: npt.ArrayLike) -> Tensor:
    """Return ``array`` as a contiguous rank-4 float32 tensor."""
    t = np.ascontiguousarray(array, dtype=np.float32)
    if t.ndim != 4:
        raise DomainError(f"Expected a rank-4 (n, c, h, w) tensor, got shape {t.shape}")
    return t


def conv2d(
    input: Tensor,
    kernel: Tensor,
    bias: npt.NDArray[np.float32] | None = None,
    stride: int = 1,
    pad: int = 0,
) -> Tensor:
    """Direct 2-D cross-correlation with zero padding."""
    n, c, h, w = input.shape
    co, ci, kh, kw = kernel.shape
    if c != ci:
        raise DomainError(f"conv2d channel mismatch: input has {c}, kernel expects {ci}")
    if stride < 1 or pad < 0:
        raise DomainError(f"conv2d needs stride >= 1 and pad >= 0, got {stride}, {pad}")
    span_h = h + 2 * pad - kh
    span_w = w + 2 * pad - kw
    if span_h < 0 or span_w < 0:
        raise DomainError(
            f"conv2d output would be empty for input {h}x{w}, kernel {kh}x{kw}, pad {pad}"
        )
    ho = span_h // stride + 1
    wo = span_w // stride + 1

    x = input
    if pad:
        x = np.pad(input, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :ho, :wo]
    out = np.tensordot(windows, kernel.astype(np.float32, copy=False), axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float32)[None, :, None, None]
    return np.ascontiguousarray(out, dtype=np.float32)


def elementwise(input: Tensor, fn: Activation) -> Tensor:
    if fn == "relu":
        out = np.maximum(input, np.float32(0))
    elif fn == "sigmoid":
        out = special.expit(input)
    elif fn == "tanh":
        out = np.tanh(input)
    else:
        raise DomainError(f"Unknown activation: {fn}")
    return np.asarray(out, dtype=np.float32)


def relu(input: Tensor) -> Tensor:
    return elementwise(input, "relu")


def sigmoid(input: Tensor) -> Tensor:
    return elementwise(input, "sigmoid")


def tanh(input: Tensor) -> Tensor:
    return elementwise(input, "tanh")


def avg_pool_last(input: npt.NDArray[np.float32], factor: int) -> npt.NDArray[np.float32]:
    """Mean-pool the last axis in bins of ``factor``; a short tail bin averages what remains."""
    if factor < 1:
        raise DomainError(f"Pooling factor must be >= 1, got {factor}")
    x = np.asarray(input, dtype=np.float32)
    if factor == 1:
        return x.copy()
    length = x.shape[-1]
    bins = math.ceil(length / factor)
    padded = np.zeros(x.shape[:-1] + (bins * factor,), dtype=np.float32)
    padded[..., :length] = x
    sums = padded.reshape(x.shape[:-1] + (bins, factor)).sum(axis=-1, dtype=np.float32)
    counts = np.full(bins, factor, dtype=np.float32)
    counts[-1] = length - (bins - 1) * factor
    return (sums / counts).astype(np.float32)


def avg_pool2x(input: Tensor) -> Tensor:
    """2x2 stride-2 average pooling; spatial dims must be even."""
    n, c, h, w = input.shape
    if h % 2 or w % 2:
        raise DomainError(f"avg_pool2x needs even spatial dims, got {h}x{w}")
    blocks = input.reshape(n, c, h // 2, 2, w // 2, 2)
    return np.ascontiguousarray(blocks.mean(axis=(3, 5), dtype=np.float32))


def bilinear_sample_1d(row: npt.ArrayLike, x: float) -> float:
    """Linear interpolation of ``row`` at fractional index ``x``; bins outside the row read 0."""
    values = np.asarray(row, dtype=np.float32)
    length = values.shape[0]
    x0 = math.floor(x)
    frac = x - x0

    def at(i: int) -> float:
        return float(values[i]) if 0 <= i < length else 0.0

    return (1.0 - frac) * at(x0) + frac * at(x0 + 1)


def bilinear_sample_rows(
    volume: npt.NDArray[np.float32], x: npt.NDArray[np.float32]
) -> npt.NDArray[np.float32]:
    """Vectorized ``bilinear_sample_1d`` along the last axis of ``volume``.

    ``volume`` has shape (..., L) and ``x`` shape (..., K) with matching leading
    dims; the result has shape (..., K).
    """
    length = volume.shape[-1]
    zeros = np.zeros(volume.shape[:-1] + (1,), dtype=np.float32)
    padded = np.concatenate([zeros, volume.astype(np.float32, copy=False), zeros], axis=-1)

    x = np.asarray(x, dtype=np.float32)
    x0 = np.floor(x)
    frac = (x - x0).astype(np.float32)
    i0 = np.clip(x0.astype(np.int64), -1, length) + 1
    i1 = np.clip(x0.astype(np.int64) + 1, -1, length) + 1
    v0 = np.take_along_axis(padded, i0, axis=-1)
    v1 = np.take_along_axis(padded, i1, axis=-1)
    return ((np.float32(1) - frac) * v0 + frac * v1).astype(np.float32)


def _interp_axis(x: Tensor, out_len: int, axis: int) -> Tensor:
    in_len = x.shape[axis]
    if out_len == in_len:
        return x
    if in_len == 1 or out_len == 1:
        pos = np.zeros(out_len, dtype=np.float64)
    else:
        pos = np.arange(out_len, dtype=np.float64) * (in_len - 1) / (out_len - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, in_len - 1)
    frac = (pos - lo).astype(np.float32)
    shape = [1] * x.ndim
    shape[axis] = out_len
    frac = frac.reshape(shape)
    a = np.take(x, lo, axis=axis)
    b = np.take(x, hi, axis=axis)
    return ((np.float32(1) - frac) * a + frac * b).astype(np.float32)


def upsample_bilinear(input: Tensor, size: tuple[int, int]) -> Tensor:
    """Bilinear resize of the spatial dims with aligned corners."""
    out = _interp_axis(input, size[0], axis=2)
    out = _interp_axis(out, size[1], axis=3)
    return np.ascontiguousarray(out, dtype=np.float32)


def softmax_channels(input: Tensor) -> Tensor:
    """Softmax across the channel axis, stabilized by max subtraction."""
    if input.shape[1] < 1:
        raise DomainError("softmax_channels needs at least one channel")
    return np.asarray(special.softmax(input, axis=1), dtype=np.float32)
