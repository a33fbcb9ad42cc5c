"""Tests for mixstereo.datasets.formats."""

from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from mixstereo.datasets.formats import (
    decode_sintel_disparity,
    depth_to_disparity,
    disparity_to_depth,
    read_disparity,
    read_image,
    read_kitti_disparity,
    read_pfm,
    read_png16,
    write_disparity,
    write_image,
    write_kitti_disparity,
    write_pfm,
    write_png16,
)
from mixstereo.datasets.types import DisparityMap
from mixstereo.errors import DomainError, FormatError


def _png_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(array).save(buf, format="PNG")
    return buf.getvalue()


class TestPfm:
    def test_little_endian_bottom_row_first(self):
        values = np.arange(6, dtype="<f4")
        data = b"Pf\n3 2\n-1.0\n" + values.tobytes()
        disp = read_pfm(data)
        assert disp.shape == (2, 3)
        np.testing.assert_array_equal(disp.values, [[3, 4, 5], [0, 1, 2]])
        assert disp.valid.all()

    def test_positive_scale_is_big_endian(self):
        values = np.array([1.5, -2.0], dtype=">f4")
        disp = read_pfm(b"Pf\n2 1\n1.0\n" + values.tobytes())
        np.testing.assert_array_equal(disp.values, [[1.5, -2.0]])

    def test_colour_keeps_first_channel(self):
        values = np.array([1, 10, 100, 2, 20, 200], dtype="<f4")
        disp = read_pfm(b"PF\n2 1\n-1.0\n" + values.tobytes())
        np.testing.assert_array_equal(disp.values, [[1, 2]])

    def test_non_finite_marked_invalid(self):
        values = np.array([np.inf, 3.0], dtype="<f4")
        disp = read_pfm(b"Pf\n2 1\n-1.0\n" + values.tobytes())
        np.testing.assert_array_equal(disp.valid, [[False, True]])
        assert disp.values[0, 0] == 0.0

    def test_roundtrip_is_bit_exact(self, rng):
        for _ in range(100):
            values = rng.normal(scale=50, size=(17, 5)).astype(np.float32)
            valid = rng.random((17, 5)) > 0.2
            original = DisparityMap.from_values(values, valid)
            back = read_pfm(write_pfm(original))
            assert back.values.tobytes() == original.values.tobytes()
            np.testing.assert_array_equal(back.valid, original.valid)

    def test_header_written(self):
        data = write_pfm(DisparityMap.from_values(np.zeros((2, 3))))
        assert data.startswith(b"Pf\n3 2\n-1.0\n")
        assert len(data) == len(b"Pf\n3 2\n-1.0\n") + 24

    @pytest.mark.parametrize(
        "payload,message",
        [
            (b"P6\n3 2\n255\n" + bytes(18), "Not a PFM"),
            (b"Pf\n3 2\n-1.0\n" + bytes(20), "truncated"),
            (b"Pf\n0 2\n-1.0\n", "zero dimensions"),
        ],
    )
    def test_corrupt_payloads(self, payload, message):
        with pytest.raises(FormatError, match=message):
            read_pfm(payload)


class TestPng16:
    def test_kitti_encoding(self):
        stored = np.array([[256, 0], [512, 1]], dtype=np.uint16)
        disp = read_kitti_disparity(_png_bytes(stored))
        np.testing.assert_array_equal(disp.valid, [[True, False], [True, True]])
        np.testing.assert_array_equal(disp.values, [[1.0, 0.0], [2.0, 1.0 / 256.0]])

    def test_roundtrip_after_quantization(self, rng):
        stored = rng.integers(1, 65536, size=(9, 13))
        values = (stored / 256.0).astype(np.float32)
        valid = rng.random((9, 13)) > 0.3
        original = DisparityMap.from_values(values, valid)
        back = read_kitti_disparity(write_kitti_disparity(original))
        np.testing.assert_array_equal(back.valid, original.valid)
        np.testing.assert_array_equal(back.values, original.values)

    def test_custom_scale(self):
        disp = read_png16(_png_bytes(np.array([[1234]], dtype=np.uint16)), scale=0.01)
        assert disp.values[0, 0] == pytest.approx(12.34, abs=1e-5)

    def test_eight_bit_rejected(self):
        with pytest.raises(FormatError, match="16-bit"):
            read_kitti_disparity(_png_bytes(np.zeros((2, 2), np.uint8)))

    def test_garbage_rejected(self):
        with pytest.raises(FormatError):
            read_png16(b"not a png")

    def test_non_positive_scale(self):
        with pytest.raises(DomainError, match="scale"):
            write_png16(DisparityMap.from_values(np.ones((1, 1))), scale=0.0)


class TestSintel:
    @pytest.mark.parametrize(
        "rgb,expected", [((1, 0, 0), 4.0), ((0, 64, 0), 1.0), ((0, 0, 0), 0.0)]
    )
    def test_packing(self, rgb, expected):
        disp = decode_sintel_disparity(np.array([[rgb]], dtype=np.uint8))
        assert disp.values[0, 0] == pytest.approx(expected)

    def test_single_channel_extremes(self):
        levels = np.arange(256, dtype=np.uint8)
        for channel, weight in enumerate((4.0, 1.0 / 64.0, 1.0 / 16384.0)):
            rgb = np.zeros((1, 256, 3), np.uint8)
            rgb[0, :, channel] = levels
            disp = decode_sintel_disparity(rgb)
            np.testing.assert_allclose(disp.values[0], levels * weight, rtol=1e-6)

    def test_bounded(self):
        disp = decode_sintel_disparity(np.full((1, 1, 3), 255, np.uint8))
        assert disp.values[0, 0] == pytest.approx(4 * 255 + 255 / 64 + 255 / 16384, rel=1e-6)

    def test_wrong_channels(self):
        with pytest.raises(FormatError, match="RGB"):
            decode_sintel_disparity(np.zeros((2, 2), np.uint8))


class TestDepth:
    def test_pinhole(self):
        disp = depth_to_disparity(np.array([[80.0]]), fx=320.0, baseline=0.25)
        assert disp.values[0, 0] == pytest.approx(1.0)

    def test_far_depth_goes_to_zero(self):
        disp = depth_to_disparity(np.array([[1e9]]), fx=320.0, baseline=0.25)
        assert 0 < disp.values[0, 0] < 1e-6

    def test_doubling_depth_halves_disparity(self, rng):
        z = rng.uniform(1, 100, size=(4, 5))
        a = depth_to_disparity(z, 320.0, 0.25)
        b = depth_to_disparity(2 * z, 320.0, 0.25)
        np.testing.assert_allclose(b.values, a.values / 2, rtol=1e-6)

    def test_invalid_depth(self):
        disp = depth_to_disparity(np.array([[0.0, -1.0, np.nan, 2.0]]), 320.0, 0.25)
        np.testing.assert_array_equal(disp.valid, [[False, False, False, True]])

    def test_inverse_roundtrip(self, rng):
        z = rng.uniform(0.5, 50, size=(6, 7))
        disp = depth_to_disparity(z, 320.0, 0.25)
        back = depth_to_disparity(disparity_to_depth(disp, 320.0, 0.25), 320.0, 0.25)
        np.testing.assert_allclose(back.values, disp.values, atol=1e-5)

    def test_inverse_marks_unusable_as_infinite(self):
        disp = DisparityMap.from_values(np.array([[0.0, 2.0]]), np.array([[True, False]]))
        assert np.isinf(disparity_to_depth(disp, 1.0, 1.0)).all()

    def test_bad_camera(self):
        with pytest.raises(DomainError, match="positive"):
            depth_to_disparity(np.ones((1, 1)), fx=0.0, baseline=0.25)


class TestFiles:
    def test_image_roundtrip(self, tmp_path, rng):
        rgb = rng.integers(0, 256, size=(4, 6, 3), dtype=np.uint8)
        write_image(tmp_path / "a.png", rgb)
        np.testing.assert_array_equal(read_image(tmp_path / "a.png"), rgb)

    def test_grayscale_image_becomes_rgb(self, tmp_path):
        Image.fromarray(np.full((2, 2), 7, np.uint8)).save(tmp_path / "g.png")
        assert read_image(tmp_path / "g.png").shape == (2, 2, 3)

    def test_unreadable_image(self, tmp_path):
        (tmp_path / "bad.png").write_bytes(b"nope")
        with pytest.raises(FormatError, match="bad.png"):
            read_image(tmp_path / "bad.png")

    def test_dispatch_by_extension(self, tmp_path):
        disp = DisparityMap.from_values(np.array([[1.5, 2.0]]))
        write_disparity(tmp_path / "d.pfm", disp)
        write_disparity(tmp_path / "d.png", disp)
        np.testing.assert_array_equal(read_disparity(tmp_path / "d.pfm").values, disp.values)
        np.testing.assert_array_equal(read_disparity(tmp_path / "d.png").values, disp.values)

    def test_corrupt_file_names_path(self, tmp_path):
        (tmp_path / "broken.pfm").write_bytes(b"Pf\n4 4\n-1.0\n")
        with pytest.raises(FormatError, match="broken.pfm"):
            read_disparity(tmp_path / "broken.pfm")

    def test_unsupported_extension(self, tmp_path):
        (tmp_path / "d.txt").write_text("1", encoding="utf-8")
        with pytest.raises(FormatError, match="Unsupported"):
            read_disparity(tmp_path / "d.txt")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_disparity(tmp_path / "absent.pfm")
