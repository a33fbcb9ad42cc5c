"""Consistency checks for loaded samples and scanned datasets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from mixstereo.datasets.catalog import DatasetDescriptor
from mixstereo.datasets.readers import get_reader
from mixstereo.datasets.types import SampleRef, StereoSample
from mixstereo.errors import FormatError

logger = logging.getLogger("mixstereo")


@dataclass
class ValidationReport:
    """Violations (failures) and warnings (informational) for one sample or dataset."""

    subject: str
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, object]:
        return {"subject": self.subject, "violations": self.violations, "warnings": self.warnings}


def _image_problems(name: str, image: np.ndarray) -> list[str]:
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        return [f"format: {name} image must be 8-bit RGB, got {image.dtype} {image.shape}"]
    return []


def validate_sample(sample: StereoSample) -> ValidationReport:
    report = ValidationReport(subject=sample.frame_id or "<sample>")
    report.violations += _image_problems("left", sample.left)
    report.violations += _image_problems("right", sample.right)

    left_hw = tuple(sample.left.shape[:2])
    right_hw = tuple(sample.right.shape[:2])
    if left_hw != right_hw:
        report.violations.append(f"dimension: left {left_hw} differs from right {right_hw}")
    if sample.regions is not None and sample.regions.shape != left_hw:
        report.violations.append(
            f"dimension: region mask {sample.regions.shape} differs from image {left_hw}"
        )

    gt = sample.disparity
    if gt is None:
        return report
    if gt.shape != left_hw:
        report.violations.append(f"dimension: ground truth {gt.shape} differs from image {left_hw}")

    width = left_hw[1]
    out_of_range = gt.valid & ((gt.values >= width) | (gt.values < 0))
    if out_of_range.any():
        rows, cols = np.nonzero(out_of_range)
        r, c = int(rows[0]), int(cols[0])
        report.violations.append(
            f"range: disparity {float(gt.values[r, c]):g} at pixel ({r}, {c}) is outside "
            f"[0, {width}); {int(out_of_range.sum())} pixels affected"
        )
    if not gt.valid.any():
        report.violations.append("density: no valid ground-truth pixels")
    return report


def validate_dataset(
    descriptor: DatasetDescriptor, refs: list[SampleRef] | None = None
) -> list[ValidationReport]:
    """Load and check every sample; unreadable files become violations naming the file."""
    reader = get_reader(descriptor.reader)
    refs = reader.scan(descriptor) if refs is None else refs
    reports = []
    for ref in refs:
        try:
            report = validate_sample(reader.load(ref, descriptor))
        except (FormatError, OSError) as e:
            report = ValidationReport(subject=ref.frame_id, violations=[f"unreadable: {e}"])
        report.subject = f"{descriptor.name}/{ref.frame_id}"
        if not report.ok:
            logger.warning(f"{report.subject}: {'; '.join(report.violations)}")
        reports.append(report)

    summary = ValidationReport(subject=descriptor.name)
    if len(refs) != descriptor.count:
        summary.warnings.append(f"count: found {len(refs)} samples, published {descriptor.count}")
    reports.append(summary)
    return reports
