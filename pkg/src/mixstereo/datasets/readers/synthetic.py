"""Readers for the synthetic pre-training datasets and InStereo2K."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from mixstereo.config import CRESTEREO_DISP_SCALE, INSTEREO2K_DISP_SCALE
from mixstereo.datasets.catalog import DatasetDescriptor
from mixstereo.datasets.formats import (
    decode_sintel_disparity,
    depth_to_disparity,
    read_disparity,
    read_image,
)
from mixstereo.datasets.readers.base import DatasetReader, SceneFolderReader, frame_id
from mixstereo.datasets.readers.registry import register
from mixstereo.datasets.types import DisparityMap, SampleRef
from mixstereo.errors import DomainError, FormatError

logger = logging.getLogger("mixstereo")

PASSES = ("clean", "final")


def _passes(descriptor: DatasetDescriptor) -> list[str]:
    passes = list(descriptor.option("passes", PASSES))
    unknown = sorted(set(passes) - set(PASSES))
    if unknown:
        raise DomainError(f"{descriptor.name}: unknown render passes {unknown}")
    return passes


class SceneflowReader(DatasetReader):
    """FlyingThings3D / Monkaa / Driving.

    ``<sub>/frames_<pass>pass/<seq>/left/*.png`` with ground truth under
    ``<sub>/disparity/<seq>/left/*.pfm``. Each render pass is a distinct sample;
    FlyingThings3D's TEST split is skipped unless ``include_test`` is set.
    """

    kind = "sceneflow"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        include_test = bool(descriptor.option("include_test", False))
        refs = []
        for pass_type in _passes(descriptor):
            token = f"frames_{pass_type}pass"
            for left in sorted(set(root.rglob(f"{token}/**/left/*.png"))):
                if not include_test and "TEST" in left.relative_to(root).parts:
                    continue
                parts = left.parts
                idx = parts.index(token)
                base = Path(*parts[:idx])
                seq = Path(*parts[idx + 1 : -2])
                right = base / token / seq / "right" / left.name
                if not self.pair_or_skip(left, right):
                    continue
                disparity = base / "disparity" / seq / "left" / left.with_suffix(".pfm").name
                refs.append(
                    SampleRef(
                        dataset=descriptor.name,
                        frame_id=frame_id(root, left),
                        left=left,
                        right=right,
                        disparity=disparity if disparity.is_file() else None,
                        pass_type=pass_type,
                    )
                )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        return None if ref.disparity is None else read_disparity(ref.disparity)


class CreStereoReader(DatasetReader):
    """``<subset>/<id>_left.jpg`` / ``_right.jpg`` with ``_left.disp.png`` (or ``.pfm``)."""

    kind = "crestereo"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("*_left.jpg"):
            stem = left.name[: -len("_left.jpg")]
            right = left.with_name(f"{stem}_right.jpg")
            if not self.pair_or_skip(left, right):
                continue
            candidates = [left.with_name(f"{stem}_left.disp.{ext}") for ext in ("png", "pfm")]
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left),
                    left=left,
                    right=right,
                    disparity=next((c for c in candidates if c.is_file()), None),
                )
            )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        return read_disparity(ref.disparity, float(descriptor.option("scale", CRESTEREO_DISP_SCALE)))


class TartanAirReader(DatasetReader):
    """``<env>/<level>/<traj>/image_left/NNNNNN_left.png`` with float32 ``depth_left/*.npy``."""

    kind = "tartanair"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("image_left/*_left.png"):
            traj = left.parent.parent
            stem = left.name[: -len("_left.png")]
            right = traj / "image_right" / f"{stem}_right.png"
            if not self.pair_or_skip(left, right):
                continue
            depth = traj / "depth_left" / f"{stem}_left_depth.npy"
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left),
                    left=left,
                    right=right,
                    disparity=depth if depth.is_file() else None,
                )
            )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        try:
            depth = np.load(ref.disparity)
        except ValueError as e:
            raise FormatError(f"Unreadable depth array: {ref.disparity}") from e
        return depth_to_disparity(
            depth,
            fx=float(descriptor.option("fx", 320.0)),
            baseline=float(descriptor.option("baseline", 0.25)),
        )


class FallingThingsReader(DatasetReader):
    """``<scene>/NNNNNN.left.jpg`` with 16-bit ``.left.depth.png`` and ``_camera_settings.json``."""

    kind = "fallingthings"
    default_fx = 768.1605834960938

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("*.left.jpg"):
            stem = left.name[: -len(".left.jpg")]
            right = left.with_name(f"{stem}.right.jpg")
            if not self.pair_or_skip(left, right):
                continue
            depth = left.with_name(f"{stem}.left.depth.png")
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left),
                    left=left,
                    right=right,
                    disparity=depth if depth.is_file() else None,
                    extras={"camera": left.with_name("_camera_settings.json")},
                )
            )
        return self.ordered(refs)

    def focal_length(self, ref: SampleRef) -> float:
        settings = ref.extras.get("camera")
        if settings is None or not settings.is_file():
            return self.default_fx
        try:
            data = json.loads(settings.read_text(encoding="utf-8"))
            return float(data["camera_settings"][0]["intrinsic_settings"]["fx"])
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as e:
            raise FormatError(f"Malformed camera settings: {settings}") from e

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        with Image.open(ref.disparity) as img:
            raw = np.asarray(img).astype(np.float64)
        unit = float(descriptor.option("depth_unit", 1e-4))
        return depth_to_disparity(
            raw * unit,
            fx=self.focal_length(ref),
            baseline=float(descriptor.option("baseline", 0.06)),
        )


class SintelReader(DatasetReader):
    """``training/<pass>_left/<scene>/frame_NNNN.png`` with RGB-packed ``disparities``.

    Occluded and out-of-frame pixels, when their masks are present, are invalid.
    """

    kind = "sintel"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for pass_type in _passes(descriptor):
            for left in root.rglob(f"{pass_type}_left/*/*.png"):
                scene = left.parent.name
                base = left.parent.parent.parent
                right = base / f"{pass_type}_right" / scene / left.name
                if not self.pair_or_skip(left, right):
                    continue
                disparity = base / "disparities" / scene / left.name
                refs.append(
                    SampleRef(
                        dataset=descriptor.name,
                        frame_id=frame_id(root, left),
                        left=left,
                        right=right,
                        disparity=disparity if disparity.is_file() else None,
                        pass_type=pass_type,
                        extras={
                            "occlusion": base / "occlusions" / scene / left.name,
                            "outofframe": base / "outofframe" / scene / left.name,
                        },
                    )
                )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        decoded = decode_sintel_disparity(read_image(ref.disparity))
        valid = decoded.valid & (decoded.values > 0)
        for key in ("occlusion", "outofframe"):
            mask_path = ref.extras.get(key)
            if mask_path is not None and mask_path.is_file():
                valid &= read_image(mask_path)[..., 0] == 0
        return DisparityMap.from_values(decoded.values, valid)


class HrvsReader(SceneFolderReader):
    kind = "hrvs"


class InStereo2KReader(DatasetReader):
    """``<part>/<scene>/left.png`` / ``right.png`` with 16-bit ``left_disp.png`` at 1/100 px."""

    kind = "instereo2k"

    def scan(self, descriptor: DatasetDescriptor) -> list[SampleRef]:
        root = self.root_of(descriptor)
        refs = []
        for left in root.rglob("left.png"):
            right = left.with_name("right.png")
            if not self.pair_or_skip(left, right):
                continue
            disparity = left.with_name("left_disp.png")
            refs.append(
                SampleRef(
                    dataset=descriptor.name,
                    frame_id=frame_id(root, left.parent),
                    left=left,
                    right=right,
                    disparity=disparity if disparity.is_file() else None,
                )
            )
        return self.ordered(refs)

    def read_disparity(self, ref: SampleRef, descriptor: DatasetDescriptor) -> DisparityMap | None:
        if ref.disparity is None:
            return None
        scale = float(descriptor.option("scale", INSTEREO2K_DISP_SCALE))
        return read_disparity(ref.disparity, scale)


register("sceneflow", SceneflowReader)
register("crestereo", CreStereoReader)
register("tartanair", TartanAirReader)
register("fallingthings", FallingThingsReader)
register("sintel", SintelReader)
register("hrvs", HrvsReader)
register("instereo2k", InStereo2KReader)
