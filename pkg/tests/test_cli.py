"""End-to-end tests for the mixstereo command line."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from mixstereo.cli import build_parser, main
from mixstereo.datasets.catalog import load_catalog
from mixstereo.datasets.formats import read_disparity, write_disparity, write_image, write_pfm
from mixstereo.datasets.types import DisparityMap

TINY_ARCH = {
    "feature_channels": 32,
    "encoder_channels": [8, 8],
    "hidden_channels": 4,
    "gru_levels": 2,
    "corr_levels": 2,
    "corr_radius": 1,
    "motion_channels": 4,
    "head_channels": 8,
    "iters": 2,
}


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch) -> Path:
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(["--quiet", *argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _scene_folders(root: Path) -> Path:
    for scene in ("Adirondack", "Motorcycle"):
        image = np.full((6, 8, 3), 90, np.uint8)
        (root / scene).mkdir(parents=True)
        write_image(root / scene / "im0.png", image)
        write_image(root / scene / "im1.png", image)
        (root / scene / "disp0GT.pfm").write_bytes(write_pfm(DisparityMap.from_values(np.full((6, 8), 2.0))))
    return root


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_evaluate_defaults(self):
        args = build_parser().parse_args(["evaluate", "--pred", "p", "--gt", "g"])
        assert args.thresholds == "1,2,3"
        assert args.resolution == "full"
        assert args.workers == 1


class TestPlanAndMix:
    def test_plan(self, capsys, tmp_path):
        code, out, _ = _run(capsys, "plan", "--out", str(tmp_path / "schedule.json"))
        assert code == 0
        assert "pretrain covers 0.83 epochs of 964741 samples" in out
        assert "finetune covers 68.77 epochs of 1745 samples" in out
        assert json.loads((tmp_path / "schedule.json").read_text())["phases"][0]["steps"] == 200000

    def test_plan_unwritable_path(self, capsys, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")
        code, _, err = _run(capsys, "plan", "--out", str(blocker / "schedule.json"))
        assert code == 2
        assert err.startswith("Error:")

    def test_mix_build(self, capsys, tmp_path):
        code, out, _ = _run(capsys, "mix", "build")
        assert code == 0
        assert out.strip() == "total 964741"

    def test_mix_build_finetune_with_manifest(self, capsys, tmp_path):
        out_path = tmp_path / "manifest.jsonl"
        code, out, _ = _run(capsys, "mix", "build", "--policy", "finetune", "--out", str(out_path))
        assert code == 0
        assert out.strip() == "total 1745"
        assert len(out_path.read_text().splitlines()) == 1 + 1745

    def test_proportions(self, capsys):
        code, out, _ = _run(capsys, "mix", "proportions")
        assert code == 0
        assert "TartanAir\t0.3178" in out.splitlines()
        assert "HR-VS\t0.0202" in out.splitlines()

    def test_sample_is_seeded(self, capsys):
        _, first, _ = _run(capsys, "mix", "sample", "--policy", "finetune", "--seed", "3", "--take", "5")
        _, second, _ = _run(capsys, "mix", "sample", "--policy", "finetune", "--seed", "3", "--take", "5")
        lines = first.splitlines()
        assert first == second
        assert len(lines) == 5
        assert set(json.loads(lines[0])) == {"dataset", "index", "copy"}

    def test_unknown_policy(self, capsys):
        code, _, err = _run(capsys, "mix", "build", "--policy", "nonexistent")
        assert code == 1
        assert "Unknown policy" in err

    def test_catalog_env_var(self, capsys, tmp_path, monkeypatch):
        catalog = tmp_path / "mine.json"
        catalog.write_text(
            json.dumps({"datasets": [{"name": "KITTI-2015", "type": "Realistic", "count": 3, "reader": "kitti"}]}),
            encoding="utf-8",
        )
        policy = tmp_path / "policy.json"
        policy.write_text(json.dumps({"factors": {"KITTI-2015": 2}}), encoding="utf-8")
        monkeypatch.setenv("MIXSTEREO_CATALOG", str(catalog))
        code, out, _ = _run(capsys, "mix", "build", "--policy", str(policy))
        assert code == 0
        assert out.strip() == "total 6"


class TestEvaluate:
    def _dirs(self, tmp_path, offset=2.5):
        pred, gt = tmp_path / "pred", tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        for stem in ("000000_10", "000001_10"):
            write_disparity(gt / f"{stem}.png", DisparityMap.from_values(np.full((5, 7), 10.0)))
            write_disparity(pred / f"{stem}.png", DisparityMap.from_values(np.full((5, 7), 10.0 + offset)))
        return pred, gt

    def test_constant_offset(self, capsys, tmp_path):
        pred, gt = self._dirs(tmp_path)
        code, out, _ = _run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--out", str(tmp_path / "report"))
        assert code == 0
        assert "| overall | 100.00 | 100.00 | 0.00 | 2.50 | 0.00 |" in out
        csv_text = (tmp_path / "report.csv").read_text()
        assert "prediction,KITTI-2015,full,all,bad 3.0,0.00" in csv_text
        assert (tmp_path / "report.md").read_text() == out

    def test_parallel_workers_match(self, capsys, tmp_path):
        pred, gt = self._dirs(tmp_path, offset=1.5)
        _, serial, _ = _run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt))
        _, parallel, _ = _run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--workers", "4")
        assert serial == parallel

    def test_orphan_prediction(self, capsys, tmp_path):
        pred, gt = self._dirs(tmp_path)
        write_disparity(pred / "000002_10.png", DisparityMap.from_values(np.ones((5, 7))))
        code, _, err = _run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt))
        assert code == 1
        assert "000002_10" in err

    def test_missing_directory(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "evaluate", "--pred", str(tmp_path / "absent"), "--gt", str(tmp_path))
        assert code == 2

    def test_size_mismatch(self, capsys, tmp_path):
        pred, gt = self._dirs(tmp_path)
        write_disparity(pred / "000000_10.png", DisparityMap.from_values(np.ones((4, 7))))
        code, _, err = _run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt))
        assert code == 1
        assert "differ" in err

    def test_region_columns(self, capsys, tmp_path):
        pred, gt, objects = tmp_path / "pred", tmp_path / "gt", tmp_path / "obj_map"
        for directory in (pred, gt, objects):
            directory.mkdir()
        values = np.full((4, 6), 10.0)
        values[:, :2] = 14.0  # every foreground pixel is off by 4 px
        values[0, 2:] = 14.0  # 4 of 16 background pixels are off by 4 px
        write_disparity(gt / "000000_10.png", DisparityMap.from_values(np.full((4, 6), 10.0)))
        write_disparity(pred / "000000_10.png", DisparityMap.from_values(values))
        obj = np.zeros((4, 6), np.uint8)
        obj[:, :2] = 1
        write_image(objects / "000000_10.png", np.repeat(obj[..., None], 3, axis=-1))

        code, out, _ = _run(
            capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--regions", str(objects)
        )
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == (
            "| sample | bad 1.0 | bad 2.0 | bad 3.0 | avgerr | D1 "
            "| all | backgr. | foregr. | foregr./backgr. |"
        )
        assert lines[-1] == (
            "| overall | 50.00 | 50.00 | 50.00 | 2.00 | 50.00 | 50.00 | 25.00 | 100.00 | 4.00 |"
        )

    def test_missing_object_map(self, capsys, tmp_path):
        pred, gt = self._dirs(tmp_path)
        (tmp_path / "obj_map").mkdir()
        code, _, err = _run(
            capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--regions", str(tmp_path / "obj_map")
        )
        assert code == 1
        assert "000000_10" in err


class TestInferAndWeights:
    def test_weights_then_infer(self, capsys, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"architecture": TINY_ARCH}), encoding="utf-8")
        weights = tmp_path / "tiny.irsw"
        code, out, _ = _run(capsys, "--config", str(config), "weights", "init", "--out", str(weights), "--seed", "4")
        assert code == 0
        assert out.startswith("wrote ")

        rng = np.random.default_rng(0)
        for side in ("left", "right"):
            write_image(tmp_path / f"{side}.png", rng.integers(0, 256, size=(10, 14, 3), dtype=np.uint8))
        result = tmp_path / "out.pfm"
        code, out, _ = _run(
            capsys,
            "infer",
            "--left", str(tmp_path / "left.png"),
            "--right", str(tmp_path / "right.png"),
            "--weights", str(weights),
            "--iters", "0",
            "--out", str(result),
        )  # fmt: skip
        assert code == 0
        disparity = read_disparity(result)
        assert disparity.shape == (10, 14)
        np.testing.assert_array_equal(disparity.values, 0.0)
        assert (tmp_path / "out.png").is_file()

    def _tiny_weights(self, capsys, tmp_path) -> Path:
        config = tmp_path / "tiny.json"
        config.write_text(json.dumps({"architecture": TINY_ARCH}), encoding="utf-8")
        weights = tmp_path / "tiny.irsw"
        code, _, _ = _run(capsys, "--config", str(config), "weights", "init", "--out", str(weights))
        assert code == 0
        return weights

    def _pair(self, tmp_path, right_width=14) -> tuple[str, str]:
        rng = np.random.default_rng(5)
        write_image(tmp_path / "left.png", rng.integers(0, 256, size=(10, 14, 3), dtype=np.uint8))
        write_image(tmp_path / "right.png", rng.integers(0, 256, size=(10, right_width, 3), dtype=np.uint8))
        return str(tmp_path / "left.png"), str(tmp_path / "right.png")

    def test_reruns_are_byte_identical(self, capsys, tmp_path):
        weights = self._tiny_weights(capsys, tmp_path)
        left, right = self._pair(tmp_path)
        outputs = []
        for name in ("first.pfm", "second.pfm"):
            code, _, _ = _run(
                capsys, "infer", "--left", left, "--right", right, "--weights", str(weights),
                "--iters", "2", "--out", str(tmp_path / name),
            )  # fmt: skip
            assert code == 0
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]

    def test_dimension_mismatch(self, capsys, tmp_path):
        weights = self._tiny_weights(capsys, tmp_path)
        left, right = self._pair(tmp_path, right_width=12)
        code, _, err = _run(capsys, "infer", "--left", left, "--right", right, "--weights", str(weights))
        assert code == 1
        assert "differ" in err

    def test_weights_must_match_configured_architecture(self, capsys, tmp_path):
        weights = self._tiny_weights(capsys, tmp_path)
        left, right = self._pair(tmp_path)
        config = tmp_path / "wider.json"
        config.write_text(json.dumps({"architecture": {**TINY_ARCH, "corr_radius": 2}}), encoding="utf-8")
        code, _, err = _run(
            capsys, "--config", str(config), "infer", "--left", left, "--right", right,
            "--weights", str(weights),
        )  # fmt: skip
        assert code == 1
        assert "shape" in err

    def test_infer_without_weights(self, capsys, tmp_path):
        write_image(tmp_path / "l.png", np.zeros((4, 4, 3), np.uint8))
        code, _, err = _run(capsys, "infer", "--left", "l.png", "--right", "l.png")
        assert code == 1
        assert "weights" in err

    def test_missing_weight_file(self, capsys, tmp_path):
        write_image(tmp_path / "l.png", np.zeros((4, 4, 3), np.uint8))
        code, _, _ = _run(capsys, "infer", "--left", "l.png", "--right", "l.png", "--weights", "absent.irsw")
        assert code == 2


class TestDataset:
    def test_scan_then_validate(self, capsys, tmp_path):
        root = _scene_folders(tmp_path / "middlebury")
        code, out, _ = _run(capsys, "dataset", "scan", "--name", "Middlebury", "--root", str(root))
        assert code == 0
        assert json.loads(out)["count"] == 2
        descriptor = load_catalog(tmp_path / "catalog.json").get("Middlebury")
        assert descriptor.scanned_count == 2
        assert descriptor.count == 15
        assert descriptor.root == str(root.resolve())

        code, out, _ = _run(capsys, "dataset", "validate", "--name", "Middlebury")
        payload = json.loads(out)
        assert code == 0
        assert payload["samples"] == 2
        assert payload["violations"] == []
        assert payload["warnings"] == ["count: found 2 samples, published 15"]

    def test_validate_reports_violations(self, capsys, tmp_path):
        root = _scene_folders(tmp_path / "middlebury")
        (root / "Motorcycle" / "disp0GT.pfm").write_bytes(b"Pf\n8 6\n-1.0\n")
        code, out, _ = _run(capsys, "dataset", "validate", "--name", "Middlebury", "--root", str(root))
        assert code == 1
        assert json.loads(out)["violations"][0]["subject"] == "Middlebury/Motorcycle"

    def test_new_dataset_needs_reader(self, capsys, tmp_path):
        root = _scene_folders(tmp_path / "scenes")
        code, _, err = _run(capsys, "dataset", "scan", "--name", "Custom", "--root", str(root))
        assert code == 1
        assert "--reader" in err

    def test_new_dataset_takes_scanned_count(self, capsys, tmp_path):
        root = _scene_folders(tmp_path / "scenes")
        code, _, _ = _run(
            capsys, "dataset", "scan", "--name", "Custom", "--root", str(root), "--reader", "eth3d"
        )
        assert code == 0
        descriptor = load_catalog(tmp_path / "catalog.json").get("Custom")
        assert descriptor.count == descriptor.scanned_count == 2

    def test_scan_creates_explicit_catalog(self, capsys, tmp_path):
        root = _scene_folders(tmp_path / "middlebury")
        catalog = tmp_path / "fresh.json"
        code, _, _ = _run(
            capsys, "dataset", "scan", "--name", "Middlebury", "--root", str(root), "--catalog", str(catalog)
        )
        assert code == 0
        assert load_catalog(catalog).get("Middlebury").scanned_count == 2

    def test_missing_root(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "dataset", "scan", "--name", "Middlebury", "--root", str(tmp_path / "absent"))
        assert code == 2


class TestErrors:
    def test_malformed_config(self, capsys, tmp_path):
        (tmp_path / "bad.json").write_text("{oops", encoding="utf-8")
        code, _, err = _run(capsys, "--config", str(tmp_path / "bad.json"), "plan")
        assert code == 1
        assert err.startswith("Error:")

    def test_invalid_config_value(self, capsys, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps({"seed": -1}), encoding="utf-8")
        code, _, _ = _run(capsys, "--config", str(tmp_path / "cfg.json"), "plan")
        assert code == 1

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "--config", str(tmp_path / "absent.json"), "plan")
        assert code == 2

    def test_explicit_catalog_must_exist(self, capsys, tmp_path):
        code, _, err = _run(capsys, "mix", "build", "--catalog", str(tmp_path / "absent.json"))
        assert code == 2
        assert "absent.json" in err

    def test_weights_in_config_must_exist(self, capsys, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps({"weights": "gone.irsw"}), encoding="utf-8")
        code, _, err = _run(capsys, "--config", str(tmp_path / "cfg.json"), "plan")
        assert code == 2
        assert "gone.irsw" in err
