"""Parameter manifest, seeded initialization and the IRSW weight-file format.

IRSW layout (little-endian throughout)::

    b"IRSW" | version byte 0x01 | u32 header length | UTF-8 JSON header | f32 blobs

The JSON header maps each parameter name to ``{"shape": [...], "offset": n,
"dtype": "f32"}`` where ``offset`` counts bytes from the start of the blob
section. An optional ``"__metadata__"`` entry carries the architecture.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from mixstereo.config import WEIGHTS_MAGIC, WEIGHTS_VERSION, ArchitectureDescriptor
from mixstereo.errors import FormatError, WeightManifestError
from mixstereo.kernels import Tensor

logger = logging.getLogger("mixstereo")

METADATA_KEY = "__metadata__"
_PREAMBLE = struct.Struct("<4sBI")


def level_suffixes(levels: int) -> list[str]:
    return ["04", "08", "16"][:levels]


def _trunk_convs(prefix: str, arch: ArchitectureDescriptor) -> dict[str, tuple[int, ...]]:
    c1, c2 = arch.encoder_channels
    return {
        f"{prefix}.conv1": (c1, 3, 7, 7),
        f"{prefix}.res1.conv1": (c1, c1, 3, 3),
        f"{prefix}.res1.conv2": (c1, c1, 3, 3),
        f"{prefix}.down": (c2, c1, 3, 3),
        f"{prefix}.res2.conv1": (c2, c2, 3, 3),
        f"{prefix}.res2.conv2": (c2, c2, 3, 3),
    }


def gru_input_channels(arch: ArchitectureDescriptor, level: int) -> int:
    """Channels concatenated with the hidden state at GRU ``level`` (0 = finest)."""
    h = arch.hidden_channels
    channels = h + h  # context + (motion features | pooled finer state)
    if level + 1 < arch.gru_levels:
        channels += h  # upsampled coarser state
    return channels


def conv_manifest(arch: ArchitectureDescriptor) -> dict[str, tuple[int, ...]]:
    """Kernel shapes of every convolution, keyed by layer name."""
    h = arch.hidden_channels
    c2 = arch.encoder_channels[1]
    m = arch.motion_channels
    convs: dict[str, tuple[int, ...]] = {}

    convs.update(_trunk_convs("fnet", arch))
    convs["fnet.out"] = (arch.feature_channels, c2, 1, 1)

    convs.update(_trunk_convs("cnet", arch))
    for i, suffix in enumerate(level_suffixes(arch.gru_levels)):
        if i > 0:
            convs[f"cnet.down{suffix}"] = (c2, c2, 3, 3)
        convs[f"cnet.out{suffix}"] = (2 * h, c2, 1, 1)

    convs["update.encoder.corr"] = (m, arch.corr_channels, 1, 1)
    convs["update.encoder.disp"] = (m, 1, 7, 7)
    convs["update.encoder.out"] = (h - 1, 2 * m, 3, 3)
    for level, suffix in enumerate(level_suffixes(arch.gru_levels)):
        cin = h + gru_input_channels(arch, level)
        for gate in ("convz", "convr", "convq"):
            convs[f"update.gru{suffix}.{gate}"] = (h, cin, 3, 3)
    convs["update.disp_head.conv1"] = (arch.head_channels, h, 3, 3)
    convs["update.disp_head.conv2"] = (1, arch.head_channels, 3, 3)
    convs["update.mask.conv1"] = (arch.head_channels, h, 3, 3)
    convs["update.mask.conv2"] = (9 * 16, arch.head_channels, 1, 1)
    return convs


def parameter_manifest(arch: ArchitectureDescriptor) -> dict[str, tuple[int, ...]]:
    """Flat ``name -> shape`` map, e.g. ``"fnet.conv1.weight" -> (64, 3, 7, 7)``."""
    manifest: dict[str, tuple[int, ...]] = {}
    for name, shape in conv_manifest(arch).items():
        manifest[f"{name}.weight"] = shape
        manifest[f"{name}.bias"] = (shape[0],)
    return manifest


@dataclass(frozen=True, eq=False)
class ModelWeights(Mapping[str, Tensor]):
    """Immutable named parameters validated against the architecture manifest."""

    arch: ArchitectureDescriptor
    params: Mapping[str, Tensor]

    def __post_init__(self) -> None:
        expected = parameter_manifest(self.arch)
        missing = sorted(set(expected) - set(self.params))
        extra = sorted(set(self.params) - set(expected))
        if missing:
            raise WeightManifestError(f"Missing parameters: {', '.join(missing[:5])}")
        if extra:
            raise WeightManifestError(f"Unexpected parameters: {', '.join(extra[:5])}")
        frozen: dict[str, Tensor] = {}
        for name, shape in expected.items():
            value = np.ascontiguousarray(self.params[name], dtype=np.float32)
            if value.shape != shape:
                raise WeightManifestError(
                    f"Parameter {name} has shape {value.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(value)):
                raise WeightManifestError(f"Parameter {name} contains non-finite values")
            value.setflags(write=False)
            frozen[name] = value
        object.__setattr__(self, "params", frozen)

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.params)

    def __len__(self) -> int:
        return len(self.params)

    def conv(self, name: str) -> tuple[Tensor, Tensor]:
        return self.params[f"{name}.weight"], self.params[f"{name}.bias"]


def init_weights(arch: ArchitectureDescriptor, seed: int = 0) -> ModelWeights:
    """Seeded fan-in scaled normal weights with zero biases."""
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}
    for name, shape in sorted(parameter_manifest(arch).items()):
        if name.endswith(".bias"):
            params[name] = np.zeros(shape, dtype=np.float32)
            continue
        fan_in = math.prod(shape[1:])
        std = math.sqrt(2.0 / fan_in)
        params[name] = rng.normal(0.0, std, size=shape).astype(np.float32)
    return ModelWeights(arch=arch, params=params)


def encode_weights(weights: ModelWeights) -> bytes:
    header: dict[str, Any] = {
        METADATA_KEY: {"architecture": weights.arch.model_dump(mode="json")},
    }
    blobs: list[bytes] = []
    offset = 0
    for name in sorted(weights):
        blob = weights[name].astype("<f4").tobytes()
        header[name] = {"shape": list(weights[name].shape), "offset": offset, "dtype": "f32"}
        blobs.append(blob)
        offset += len(blob)
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return (
        _PREAMBLE.pack(WEIGHTS_MAGIC, WEIGHTS_VERSION, len(header_bytes))
        + header_bytes
        + b"".join(blobs)
    )


def decode_weights(data: bytes, arch: ArchitectureDescriptor | None = None) -> ModelWeights:
    if len(data) < _PREAMBLE.size:
        raise FormatError("Weight file is truncated before the header")
    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != WEIGHTS_MAGIC:
        raise FormatError(f"Bad weight-file magic: {magic!r}")
    if version != WEIGHTS_VERSION:
        raise FormatError(f"Unsupported weight-file version: {version}")
    start = _PREAMBLE.size
    if start + header_len > len(data):
        raise FormatError("Weight-file header runs past end of file")
    try:
        header = json.loads(data[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"Weight-file header is not valid JSON: {e}") from e
    if not isinstance(header, dict):
        raise FormatError("Weight-file header must be a JSON object")

    metadata = header.pop(METADATA_KEY, None)
    if arch is None:
        if isinstance(metadata, dict) and "architecture" in metadata:
            arch = ArchitectureDescriptor.model_validate(metadata["architecture"])
        else:
            arch = ArchitectureDescriptor()

    blob = memoryview(data)[start + header_len :]
    params: dict[str, Tensor] = {}
    for name, entry in header.items():
        try:
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
            dtype = entry["dtype"]
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"Malformed header entry for {name}: {entry!r}") from e
        if dtype != "f32":
            raise FormatError(f"Unsupported dtype {dtype!r} for {name}")
        nbytes = 4 * math.prod(shape)
        if offset < 0 or offset + nbytes > len(blob):
            raise FormatError(f"Blob for {name} is out of bounds")
        params[name] = (
            np.frombuffer(blob[offset : offset + nbytes], dtype="<f4")
            .astype(np.float32)
            .reshape(shape)
        )
    return ModelWeights(arch=arch, params=params)


def save_weights(path: str | Path, weights: ModelWeights) -> None:
    Path(path).write_bytes(encode_weights(weights))
    logger.info(f"Wrote {len(weights)} parameters to {path}")


def load_weights(path: str | Path, arch: ArchitectureDescriptor | None = None) -> ModelWeights:
    weights = decode_weights(Path(path).read_bytes(), arch)
    logger.info(f"Loaded {len(weights)} parameters from {path}")
    return weights
