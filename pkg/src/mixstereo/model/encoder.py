"""Feature and context encoders, both producing maps at 1/4 input resolution."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from mixstereo.errors import DomainError
from mixstereo.kernels import Tensor, as_tensor, conv2d, relu, tanh
from mixstereo.model.weights import ModelWeights, level_suffixes


def image_to_tensor(image: npt.ArrayLike) -> Tensor:
    """8-bit HxW or HxWx3 image -> (1, 3, H, W) tensor scaled to [-1, 1]."""
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DomainError(f"Expected an HxWx3 image, got shape {arr.shape}")
    x = arr.astype(np.float32).transpose(2, 0, 1)[None]
    return as_tensor(2.0 * (x / 255.0) - 1.0)


def apply_conv(
    x: Tensor, weights: ModelWeights, name: str, stride: int = 1, pad: int | None = None
) -> Tensor:
    kernel, bias = weights.conv(name)
    if pad is None:
        pad = kernel.shape[-1] // 2
    return conv2d(x, kernel, bias, stride=stride, pad=pad)


def _residual(x: Tensor, weights: ModelWeights, name: str) -> Tensor:
    y = relu(apply_conv(x, weights, f"{name}.conv1"))
    y = apply_conv(y, weights, f"{name}.conv2")
    return relu(x + y)


def _trunk(x: Tensor, weights: ModelWeights, prefix: str) -> Tensor:
    x = relu(apply_conv(x, weights, f"{prefix}.conv1", stride=2, pad=3))
    x = _residual(x, weights, f"{prefix}.res1")
    x = relu(apply_conv(x, weights, f"{prefix}.down", stride=2, pad=1))
    return _residual(x, weights, f"{prefix}.res2")


def _check_input(image: Tensor) -> None:
    h, w = image.shape[2:]
    if h % 4 or w % 4:
        raise DomainError(f"Encoder input must be padded to a multiple of 4, got {h}x{w}")


def extract_features(left: Tensor, right: Tensor, weights: ModelWeights) -> tuple[Tensor, Tensor]:
    """Shared-weight feature maps of both views at exactly 1/4 resolution."""
    if left.shape != right.shape:
        raise DomainError(f"Left {left.shape} and right {right.shape} shapes differ")
    _check_input(left)
    feats = []
    for image in (left, right):
        feats.append(apply_conv(_trunk(image, weights, "fnet"), weights, "fnet.out", pad=0))
    return feats[0], feats[1]


def context_features(image: Tensor, weights: ModelWeights) -> tuple[list[Tensor], list[Tensor]]:
    """Initial hidden state (tanh) and context input (relu) for every GRU level."""
    _check_input(image)
    h = weights.arch.hidden_channels
    trunk = _trunk(image, weights, "cnet")
    hidden: list[Tensor] = []
    context: list[Tensor] = []
    for i, suffix in enumerate(level_suffixes(weights.arch.gru_levels)):
        if i > 0:
            trunk = relu(apply_conv(trunk, weights, f"cnet.down{suffix}", stride=2, pad=1))
        out = apply_conv(trunk, weights, f"cnet.out{suffix}", pad=0)
        hidden.append(tanh(out[:, :h]))
        context.append(relu(out[:, h:]))
    return hidden, context
