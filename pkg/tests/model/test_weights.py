"""Tests for the parameter manifest and the IRSW weight-file format."""

from __future__ import annotations

import json
import struct

import numpy as np
import pytest

from mixstereo.config import ArchitectureDescriptor
from mixstereo.errors import FormatError, WeightManifestError
from mixstereo.model.weights import (
    ModelWeights,
    decode_weights,
    encode_weights,
    init_weights,
    load_weights,
    parameter_manifest,
    save_weights,
)


class TestManifest:
    def test_default_architecture_names(self):
        manifest = parameter_manifest(ArchitectureDescriptor())
        assert manifest["fnet.conv1.weight"] == (64, 3, 7, 7)
        assert manifest["fnet.out.weight"] == (256, 96, 1, 1)
        assert manifest["update.mask.conv2.weight"] == (144, 256, 1, 1)
        assert manifest["update.encoder.corr.weight"] == (64, 36, 1, 1)
        for suffix in ("04", "08", "16"):
            assert f"update.gru{suffix}.convz.weight" in manifest

    def test_every_weight_has_a_bias(self, tiny_arch):
        manifest = parameter_manifest(tiny_arch)
        weights = [n for n in manifest if n.endswith(".weight")]
        for name in weights:
            bias = name[: -len(".weight")] + ".bias"
            assert manifest[bias] == (manifest[name][0],)

    def test_fewer_gru_levels_drop_coarse_layers(self, tiny_arch):
        arch = tiny_arch.model_copy(update={"gru_levels": 1})
        manifest = parameter_manifest(arch)
        assert "update.gru04.convz.weight" in manifest
        assert not any("gru08" in n or "gru16" in n for n in manifest)


class TestInit:
    def test_seeded_and_deterministic(self, tiny_arch):
        a = init_weights(tiny_arch, seed=3)
        b = init_weights(tiny_arch, seed=3)
        c = init_weights(tiny_arch, seed=4)
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])
        assert not np.array_equal(a["fnet.conv1.weight"], c["fnet.conv1.weight"])

    def test_biases_zero(self, tiny_weights):
        for name, value in tiny_weights.items():
            if name.endswith(".bias"):
                assert not value.any()

    def test_parameters_are_read_only(self, tiny_weights):
        with pytest.raises(ValueError):
            tiny_weights["fnet.conv1.bias"][0] = 1.0


class TestValidation:
    def test_missing_parameter(self, tiny_arch, tiny_weights):
        params = dict(tiny_weights.params)
        del params["fnet.conv1.weight"]
        with pytest.raises(WeightManifestError, match="Missing"):
            ModelWeights(arch=tiny_arch, params=params)

    def test_unexpected_parameter(self, tiny_arch, tiny_weights):
        params = dict(tiny_weights.params)
        params["extra.weight"] = np.zeros(1, np.float32)
        with pytest.raises(WeightManifestError, match="Unexpected"):
            ModelWeights(arch=tiny_arch, params=params)

    def test_wrong_shape(self, tiny_arch, tiny_weights):
        params = dict(tiny_weights.params)
        params["fnet.conv1.bias"] = np.zeros(5, np.float32)
        with pytest.raises(WeightManifestError, match="shape"):
            ModelWeights(arch=tiny_arch, params=params)

    def test_non_finite(self, tiny_arch, tiny_weights):
        params = dict(tiny_weights.params)
        bad = np.array(params["fnet.conv1.bias"])
        bad[0] = np.nan
        params["fnet.conv1.bias"] = bad
        with pytest.raises(WeightManifestError, match="non-finite"):
            ModelWeights(arch=tiny_arch, params=params)


class TestFileFormat:
    def test_layout(self, tiny_weights):
        data = encode_weights(tiny_weights)
        assert data[:4] == b"IRSW"
        assert data[4] == 0x01
        (header_len,) = struct.unpack_from("<I", data, 5)
        header = json.loads(data[9 : 9 + header_len].decode("utf-8"))
        entry = header["fnet.conv1.weight"]
        assert entry["dtype"] == "f32"
        assert entry["shape"] == [8, 3, 7, 7]
        blob = data[9 + header_len :]
        values = np.frombuffer(blob, dtype="<f4", count=8 * 3 * 7 * 7, offset=entry["offset"])
        np.testing.assert_array_equal(values.reshape(8, 3, 7, 7), tiny_weights["fnet.conv1.weight"])

    def test_roundtrip_through_file(self, tmp_path, tiny_weights):
        path = tmp_path / "model.irsw"
        save_weights(path, tiny_weights)
        loaded = load_weights(path)
        assert loaded.arch == tiny_weights.arch
        assert sorted(loaded) == sorted(tiny_weights)
        for name in tiny_weights:
            np.testing.assert_array_equal(loaded[name], tiny_weights[name])

    def test_bad_magic(self, tiny_weights):
        data = b"XXXX" + encode_weights(tiny_weights)[4:]
        with pytest.raises(FormatError, match="magic"):
            decode_weights(data)

    def test_bad_version(self, tiny_weights):
        data = bytearray(encode_weights(tiny_weights))
        data[4] = 2
        with pytest.raises(FormatError, match="version"):
            decode_weights(bytes(data))

    def test_truncated_blob(self, tiny_weights):
        data = encode_weights(tiny_weights)[:-4]
        with pytest.raises(FormatError, match="out of bounds"):
            decode_weights(data)

    def test_truncated_preamble(self):
        with pytest.raises(FormatError, match="truncated"):
            decode_weights(b"IRS")

    def test_explicit_architecture_must_match(self, tiny_weights):
        other = tiny_weights.arch.model_copy(update={"hidden_channels": 6})
        with pytest.raises(WeightManifestError):
            decode_weights(encode_weights(tiny_weights), other)
