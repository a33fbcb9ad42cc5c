"""Miniature on-disk dataset trees in each reader's layout."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from mixstereo.datasets.formats import write_pfm
from mixstereo.datasets.types import DisparityMap

H, W = 6, 8


def rgb(path: Path, value: int = 100) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.full((H, W, 3), value, np.uint8)).save(path, format="PNG")


def pfm(path: Path, value: float = 2.0) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_pfm(DisparityMap.from_values(np.full((H, W), value))))


def png16(path: Path, stored: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.full((H, W), stored, np.uint16)).save(path, format="PNG")


@pytest.fixture
def sceneflow_root(tmp_path) -> Path:
    """Three training pairs in each render pass plus one TEST pair."""
    root = tmp_path / "sceneflow"
    frames = [
        ("FlyingThings3D", "TRAIN/A/0000", "0006.png"),
        ("FlyingThings3D", "TRAIN/A/0000", "0007.png"),
        ("Monkaa", "treeflight_x2", "0000.png"),
        ("FlyingThings3D", "TEST/A/0000", "0006.png"),
    ]
    for sub, seq, name in frames:
        for pass_type in ("clean", "final"):
            frame_dir = root / sub / f"frames_{pass_type}pass" / seq
            rgb(frame_dir / "left" / name)
            rgb(frame_dir / "right" / name)
        pfm(root / sub / "disparity" / seq / "left" / name.replace(".png", ".pfm"))
    return root


@pytest.fixture
def scene_folder_root(tmp_path) -> Path:
    """Middlebury / ETH3D / HR-VS layout: one directory per scene."""
    root = tmp_path / "scenes"
    for scene in ("Adirondack", "Motorcycle"):
        rgb(root / scene / "im0.png")
        rgb(root / scene / "im1.png")
        pfm(root / scene / "disp0GT.pfm", 3.0)
    return root


@pytest.fixture
def kitti_root(tmp_path) -> Path:
    root = tmp_path / "kitti"
    train = root / "training"
    for frame in ("000000", "000001"):
        rgb(train / "image_2" / f"{frame}_10.png")
        rgb(train / "image_3" / f"{frame}_10.png")
        png16(train / "disp_occ_0" / f"{frame}_10.png", 512)
    rgb(train / "image_2" / "000000_11.png")
    obj = np.zeros((H, W), np.uint8)
    obj[:, :2] = 1
    Image.fromarray(obj).save(_mkparent(train / "obj_map" / "000000_10.png"))
    rgb(root / "testing" / "image_2" / "000000_10.png")
    rgb(root / "testing" / "image_3" / "000000_10.png")
    return root


@pytest.fixture
def sintel_root(tmp_path) -> Path:
    root = tmp_path / "sintel"
    base = root / "training"
    for pass_type in ("clean", "final"):
        rgb(base / f"{pass_type}_left" / "alley_1" / "frame_0001.png")
        rgb(base / f"{pass_type}_right" / "alley_1" / "frame_0001.png")
    packed = np.zeros((H, W, 3), np.uint8)
    packed[..., 0] = 2  # 8 px
    packed[0, 0] = 0  # zero disparity
    Image.fromarray(packed).save(_mkparent(base / "disparities" / "alley_1" / "frame_0001.png"))
    occluded = np.zeros((H, W), np.uint8)
    occluded[1, 1] = 255
    Image.fromarray(occluded).save(_mkparent(base / "occlusions" / "alley_1" / "frame_0001.png"))
    return root


@pytest.fixture
def tartanair_root(tmp_path) -> Path:
    root = tmp_path / "tartanair"
    traj = root / "abandonedfactory" / "Easy" / "P000"
    rgb(traj / "image_left" / "000000_left.png")
    rgb(traj / "image_right" / "000000_right.png")
    depth = np.full((H, W), 80.0, np.float32)
    depth[0, 0] = 0.0
    np.save(_mkparent(traj / "depth_left" / "000000_left_depth.npy"), depth)
    return root


@pytest.fixture
def fallingthings_root(tmp_path) -> Path:
    root = tmp_path / "fat"
    scene = root / "mixed" / "kitchen_0"
    rgb(scene / "000000.left.jpg")
    rgb(scene / "000000.right.jpg")
    png16(scene / "000000.left.depth.png", 10000)  # 1 m in 1e-4 m units
    settings = {"camera_settings": [{"intrinsic_settings": {"fx": 768.0}}]}
    (scene / "_camera_settings.json").write_text(json.dumps(settings), encoding="utf-8")
    return root


@pytest.fixture
def instereo2k_root(tmp_path) -> Path:
    root = tmp_path / "instereo2k"
    scene = root / "part1" / "000001"
    rgb(scene / "left.png")
    rgb(scene / "right.png")
    png16(scene / "left_disp.png", 1234)
    return root


@pytest.fixture
def crestereo_root(tmp_path) -> Path:
    root = tmp_path / "crestereo"
    for stem in ("0001", "0002"):
        rgb(root / "tree" / f"{stem}_left.jpg")
        rgb(root / "tree" / f"{stem}_right.jpg")
        png16(root / "tree" / f"{stem}_left.disp.png", 64)
    return root


def _mkparent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
