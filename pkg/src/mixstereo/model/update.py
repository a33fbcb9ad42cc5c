"""Multi-level convolutional GRU update block.

Level 0 is the finest (1/4 resolution); each further level halves it. Coarse
levels are updated first and feed the finer ones through bilinear upsampling,
while finer states reach coarser levels through 2x average pooling.
"""

from __future__ import annotations

import numpy as np

from mixstereo.kernels import Tensor, avg_pool2x, relu, sigmoid, tanh, upsample_bilinear
from mixstereo.model.encoder import apply_conv
from mixstereo.model.weights import ModelWeights, level_suffixes

GruState = list[Tensor]


def _cat(tensors: list[Tensor]) -> Tensor:
    return np.concatenate(tensors, axis=1)


def conv_gru(h: Tensor, inputs: list[Tensor], weights: ModelWeights, name: str) -> Tensor:
    x = _cat(inputs)
    hx = _cat([h, x])
    z = sigmoid(apply_conv(hx, weights, f"{name}.convz"))
    r = sigmoid(apply_conv(hx, weights, f"{name}.convr"))
    q = tanh(apply_conv(_cat([r * h, x]), weights, f"{name}.convq"))
    h_new = (np.float32(1) - z) * h + z * q
    # float rounding can step just outside [-1, 1]
    return np.clip(h_new, -1.0, 1.0).astype(np.float32)


def motion_features(corr: Tensor, disp: Tensor, weights: ModelWeights) -> Tensor:
    c = relu(apply_conv(corr, weights, "update.encoder.corr", pad=0))
    d = relu(apply_conv(disp, weights, "update.encoder.disp", pad=3))
    out = relu(apply_conv(_cat([c, d]), weights, "update.encoder.out"))
    return _cat([out, disp])


def _upsample_to(x: Tensor, like: Tensor) -> Tensor:
    return upsample_bilinear(x, (like.shape[2], like.shape[3]))


def gru_update(
    state: GruState,
    context: list[Tensor],
    corr_feats: Tensor,
    disp: Tensor,
    weights: ModelWeights,
) -> tuple[GruState, Tensor]:
    """One refinement step; returns the new hidden states and the disparity increment."""
    levels = len(state)
    suffixes = level_suffixes(levels)
    new = list(state)

    if levels >= 3:
        new[2] = conv_gru(new[2], [context[2], avg_pool2x(new[1])], weights, f"update.gru{suffixes[2]}")
    if levels >= 2:
        inputs = [context[1], avg_pool2x(new[0])]
        if levels >= 3:
            inputs.append(_upsample_to(new[2], new[1]))
        new[1] = conv_gru(new[1], inputs, weights, f"update.gru{suffixes[1]}")

    inputs = [context[0], motion_features(corr_feats, disp, weights)]
    if levels >= 2:
        inputs.append(_upsample_to(new[1], new[0]))
    new[0] = conv_gru(new[0], inputs, weights, f"update.gru{suffixes[0]}")

    delta = relu(apply_conv(new[0], weights, "update.disp_head.conv1"))
    delta = apply_conv(delta, weights, "update.disp_head.conv2")
    return new, delta


def mask_logits(state: GruState, weights: ModelWeights) -> Tensor:
    """Convex-upsampling mask logits (9 neighbours x 16 sub-pixels) from the finest state."""
    x = relu(apply_conv(state[0], weights, "update.mask.conv1"))
    return (np.float32(0.25) * apply_conv(x, weights, "update.mask.conv2", pad=0)).astype(
        np.float32
    )
