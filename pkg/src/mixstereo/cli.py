from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from .config import (
    CATALOG_ENV_VAR,
    DEFAULT_LOG_LEVEL,
    DEFAULT_THRESHOLDS,
    MIDDLEBURY_RESOLUTIONS,
    PipelineConfig,
)
from .datasets.catalog import Catalog, DatasetDescriptor, default_catalog, load_catalog, save_catalog
from .datasets.formats import (
    read_disparity,
    read_image,
    read_region_mask,
    write_image,
    write_pfm,
)
from .datasets.readers import scan_dataset
from .datasets.types import DisparityMap, RegionMask
from .datasets.validate import validate_dataset
from .errors import DomainError
from .evaluation.colormap import colorize_disparity
from .evaluation.metrics import EvalResult, aggregate, evaluate_pair, rescale_ground_truth
from .evaluation.report import render_evaluation
from .logging_config import setup_logger
from .model.raft import infer
from .model.weights import init_weights, load_weights, save_weights
from .pipeline.manifest import (
    build_manifest,
    expected_proportions,
    manifest_total,
    sample_epoch,
    save_manifest,
)
from .pipeline.policy import ReplicationPolicy, load_policy
from .pipeline.schedule import make_schedule, plan_summary, save_schedule

logger = logging.getLogger("mixstereo")

DISPARITY_SUFFIXES = (".pfm", ".png")


# ---------- Configuration ----------


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults < config file < MIXSTEREO_CATALOG < command-line flags."""
    data: dict[str, Any] = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise DomainError(f"Config file {args.config} must hold a JSON object")
    if env_catalog := os.environ.get(CATALOG_ENV_VAR):
        data["catalog"] = env_catalog
    for key in ("catalog", "policy", "weights", "iters", "output_dir", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return PipelineConfig.model_validate(data)


def _catalog(cfg: PipelineConfig) -> Catalog:
    path = Path(cfg.catalog)
    if path.is_file():
        return load_catalog(path)
    logger.info(f"Catalog {path} not found, using the built-in catalog")
    return default_catalog("all")


def _policy(cfg: PipelineConfig) -> ReplicationPolicy:
    return load_policy(cfg.policy)


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# ---------- dataset ----------


def cmd_dataset_scan(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    catalog = _catalog(cfg)
    known = args.name in catalog
    if known:
        descriptor = catalog.get(args.name)
    elif args.reader:
        descriptor = DatasetDescriptor(name=args.name, type=args.type, count=1, reader=args.reader)
    else:
        raise DomainError(f"Unknown dataset {args.name}; pass --reader to add it")

    updates: dict[str, Any] = {"root": str(Path(args.root).resolve())}
    if args.reader:
        updates["reader"] = args.reader
    descriptor = descriptor.model_copy(update=updates)
    refs = scan_dataset(descriptor, check_count=known)
    updates = {"scanned_count": len(refs)}
    if not known:
        updates["count"] = max(1, len(refs))
    descriptor = descriptor.model_copy(update=updates)
    save_catalog(cfg.catalog, catalog.replace(descriptor))
    _emit({"dataset": descriptor.name, "count": len(refs), "catalog": cfg.catalog})
    return 0


def cmd_dataset_validate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    descriptor = _catalog(cfg).get(args.name)
    if args.root:
        descriptor = descriptor.model_copy(update={"root": str(Path(args.root).resolve())})
    reports = validate_dataset(descriptor)
    failed = [r for r in reports if not r.ok]
    _emit(
        {
            "dataset": descriptor.name,
            "samples": len(reports) - 1,
            "violations": [r.to_dict() for r in failed],
            "warnings": [w for r in reports for w in r.warnings],
        }
    )
    return 1 if failed else 0


# ---------- mix ----------


def cmd_mix_build(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    manifest = build_manifest(_catalog(cfg), _policy(cfg))
    if args.out:
        save_manifest(args.out, manifest)
    print(f"total {manifest.total}")
    return 0


def cmd_mix_proportions(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    for name, fraction in expected_proportions(_catalog(cfg), _policy(cfg)).items():
        print(f"{name}\t{fraction:.4f}")
    return 0


def cmd_mix_sample(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if args.take < 0:
        raise DomainError(f"--take must be >= 0, got {args.take}")
    manifest = build_manifest(_catalog(cfg), _policy(cfg))
    for n, entry in enumerate(sample_epoch(manifest, cfg.seed)):
        if n >= args.take:
            break
        print(json.dumps({"dataset": entry.dataset, "index": entry.index, "copy": entry.copy}))
    return 0


# ---------- infer ----------


def cmd_infer(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if not cfg.weights:
        raise DomainError("No weights given; pass --weights or set it in the config file")
    # an architecture named in the config must match the file; otherwise the file's own metadata wins
    arch = cfg.architecture if "architecture" in cfg.model_fields_set else None
    weights = load_weights(cfg.weights, arch)
    iters = args.iters if args.iters is not None else weights.arch.iters
    disparity = infer(read_image(args.left), read_image(args.right), weights, iters=iters)

    out = Path(args.out) if args.out else Path(cfg.output_dir) / "disparity.pfm"
    out.write_bytes(write_pfm(disparity))
    write_image(out.with_suffix(".png"), colorize_disparity(disparity))
    values = disparity.values[disparity.valid]
    print(
        f"disparity min {values.min():.4f} max {values.max():.4f} mean {values.mean():.4f} "
        f"-> {out}"
    )
    return 0


# ---------- evaluate ----------


def _disparity_files(directory: Path) -> dict[str, Path]:
    if not directory.is_dir():
        raise FileNotFoundError(f"Directory not found: {directory}")
    return {p.stem: p for p in sorted(directory.iterdir()) if p.suffix.lower() in DISPARITY_SUFFIXES}


def _evaluate_one(
    pred_path: Path,
    gt_path: Path,
    factor: float,
    thresholds: tuple[float, ...],
    region_path: Path | None,
) -> EvalResult:
    pred: DisparityMap = read_disparity(pred_path)
    gt = rescale_ground_truth(read_disparity(gt_path), factor)
    region: RegionMask | None = None
    if region_path is not None:
        region = read_region_mask(region_path)
    return evaluate_pair(pred, gt, thresholds, region)


def cmd_evaluate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    preds = _disparity_files(Path(args.pred))
    gts = _disparity_files(Path(args.gt))
    orphans = sorted(set(preds) - set(gts))
    if orphans:
        raise DomainError(f"Predictions without ground truth: {', '.join(orphans)}")
    missing = sorted(set(gts) - set(preds))
    if missing:
        raise DomainError(f"Ground truth without predictions: {', '.join(missing)}")
    if not preds:
        raise DomainError(f"No disparity files in {args.pred}")

    factor = 1.0 if args.resolution == "full" else MIDDLEBURY_RESOLUTIONS[args.resolution]
    thresholds = tuple(float(t) for t in args.thresholds.split(","))
    regions: dict[str, Path] = {}
    if args.regions:
        regions = {p.stem: p for p in Path(args.regions).glob("*.png")}
        absent = sorted(set(preds) - set(regions))
        if absent:
            raise DomainError(f"Missing object maps for: {', '.join(absent)}")

    stems = sorted(preds)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        results = list(
            pool.map(
                lambda s: _evaluate_one(preds[s], gts[s], factor, thresholds, regions.get(s)),
                stems,
            )
        )
    per_image = dict(zip(stems, results, strict=True))
    overall = aggregate(per_image)
    report = render_evaluation(args.method, args.dataset, args.resolution, per_image, overall)

    if args.out:
        prefix = Path(args.out)
        prefix.with_suffix(".csv").write_text(report.csv, encoding="utf-8")
        prefix.with_suffix(".md").write_text(report.markdown, encoding="utf-8")
    print(report.markdown, end="")
    return 0


# ---------- plan / weights ----------


def cmd_plan(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    phases = make_schedule()
    catalog = _catalog(cfg)
    totals = {}
    for phase in phases:
        totals[phase.name] = manifest_total(catalog, load_policy(phase.policy))
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "schedule.json"
    save_schedule(out, phases)
    for line in plan_summary(phases, totals):
        print(line)
    return 0


def cmd_weights_init(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    weights = init_weights(cfg.architecture, seed=cfg.seed)
    save_weights(args.out, weights)
    count = sum(int(np.prod(p.shape)) for p in weights.values())
    print(f"wrote {len(weights)} tensors ({count} values) to {args.out}")
    return 0


# ---------- Parser ----------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mixstereo", description="MixStereo: iterative stereo matching toolkit"
    )
    p.add_argument("--config", help="pipeline config JSON file")
    p.add_argument("--log-file", help="log file path")
    p.add_argument("--quiet", action="store_true", help="disable console logging")
    p.add_argument(
        "--log-level",
        default=DEFAULT_LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level",
    )
    commands = p.add_subparsers(dest="command", required=True)

    def catalog_flag(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--catalog", help=f"catalog JSON path (env {CATALOG_ENV_VAR})")

    dataset = commands.add_parser("dataset", help="scan or validate a dataset")
    dataset_cmds = dataset.add_subparsers(dest="subcommand", required=True)
    scan = dataset_cmds.add_parser("scan", help="count samples and record them in the catalog")
    scan.add_argument("--root", required=True, help="dataset root directory")
    scan.add_argument("--name", required=True, help="dataset name in the catalog")
    scan.add_argument("--reader", help="reader kind (required for datasets not in the catalog)")
    scan.add_argument("--type", default="Synthetic", choices=["Synthetic", "Realistic"])
    catalog_flag(scan)
    scan.set_defaults(func=cmd_dataset_scan)
    validate = dataset_cmds.add_parser("validate", help="check every sample of a dataset")
    validate.add_argument("--name", required=True, help="dataset name in the catalog")
    validate.add_argument("--root", help="override the catalog's root path")
    catalog_flag(validate)
    validate.set_defaults(func=cmd_dataset_validate)

    mix = commands.add_parser("mix", help="replicated training manifests")
    mix_cmds = mix.add_subparsers(dest="subcommand", required=True)
    for name, func, helptext in (
        ("build", cmd_mix_build, "build the manifest and report its size"),
        ("proportions", cmd_mix_proportions, "print each dataset's share of an epoch"),
        ("sample", cmd_mix_sample, "stream the first entries of a seeded epoch"),
    ):
        sp = mix_cmds.add_parser(name, help=helptext)
        catalog_flag(sp)
        sp.add_argument("--policy", help="pretrain, finetune, or a policy JSON path")
        sp.set_defaults(func=func)
        if name == "build":
            sp.add_argument("--out", help="manifest JSONL output path")
        if name == "sample":
            sp.add_argument("--seed", type=int, help="shuffle seed")
            sp.add_argument("--take", type=int, default=10, help="number of entries to print")

    inf = commands.add_parser("infer", help="estimate disparity for one image pair")
    inf.add_argument("--left", required=True, help="left image path")
    inf.add_argument("--right", required=True, help="right image path")
    inf.add_argument("--weights", help="IRSW weight file")
    inf.add_argument("--iters", type=int, help="refinement iterations")
    inf.add_argument("--out", help="output PFM path (a colormapped PNG is written beside it)")
    inf.set_defaults(func=cmd_infer)

    ev = commands.add_parser("evaluate", help="score predictions against ground truth")
    ev.add_argument("--pred", required=True, help="directory of predicted disparity files")
    ev.add_argument("--gt", required=True, help="directory of ground-truth disparity files")
    ev.add_argument("--dataset", default="KITTI-2015", help="dataset label for the report")
    ev.add_argument("--method", default="prediction", help="method label for the report")
    ev.add_argument(
        "--thresholds",
        default=",".join(f"{t:g}" for t in DEFAULT_THRESHOLDS),
        help="comma-separated bad-tau thresholds in px",
    )
    ev.add_argument("--regions", help="directory of KITTI object maps for the fg/bg split")
    ev.add_argument("--resolution", default="full", choices=["full", "half", "quarter"])
    ev.add_argument("--workers", type=int, default=1, help="parallel image workers")
    ev.add_argument("--out", help="output prefix for .csv and .md reports")
    ev.set_defaults(func=cmd_evaluate)

    plan = commands.add_parser("plan", help="write the two-phase training schedule")
    plan.add_argument("--out", help="schedule JSON output path")
    catalog_flag(plan)
    plan.set_defaults(func=cmd_plan)

    weights = commands.add_parser("weights", help="weight-file utilities")
    weights_cmds = weights.add_subparsers(dest="subcommand", required=True)
    winit = weights_cmds.add_parser("init", help="write seeded random weights")
    winit.add_argument("--out", required=True, help="IRSW output path")
    winit.add_argument("--seed", type=int, help="initialization seed")
    winit.set_defaults(func=cmd_weights_init)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(argv)
    setup_logger(args.log_file, to_console=not args.quiet, level=args.log_level)

    try:
        cfg = resolve_config(args)
        missing = cfg.missing_paths(catalog_required=args.func is not cmd_dataset_scan)
        if missing:
            raise FileNotFoundError(f"Referenced paths do not exist: {', '.join(missing)}")
        return int(args.func(args, cfg))
    except (DomainError, ValidationError, json.JSONDecodeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception("Unexpected error")
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
