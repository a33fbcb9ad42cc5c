"""Disparity error metrics: EPE, bad-tau, avgerr, KITTI D1 and region splits.

All percentages are in [0, 100] and use strict inequality (EPE > tau). Only
ground-truth-valid pixels are evaluated; the raw predicted value is used at
every such pixel.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
import numpy.typing as npt

from mixstereo.config import DEFAULT_THRESHOLDS, KITTI_D1_RELATIVE
from mixstereo.datasets.types import DisparityMap, RegionMask
from mixstereo.errors import DomainError, EmptyEvaluationError

logger = logging.getLogger("mixstereo")

REGION_TAU = 3.0


@dataclass(frozen=True)
class ErrorMap:
    """Per-pixel end-point error; ``valid`` marks the evaluated pixels."""

    epe: npt.NDArray[np.float64]
    valid: npt.NDArray[np.bool_]

    @property
    def count(self) -> int:
        return int(self.valid.sum())


@dataclass(frozen=True)
class RegionBreakdown:
    """bad-tau over all / background / foreground pixels; None where a region is empty."""

    all: float
    background: float | None
    foreground: float | None
    tau: float = REGION_TAU

    @property
    def ratio(self) -> float | None:
        if self.foreground is None or not self.background:
            return None
        return fg_bg_ratio(self.foreground, self.background)


@dataclass(frozen=True)
class PixelTally:
    """Raw counts behind an EvalResult, so results can be pooled exactly."""

    valid: int
    total: int
    epe_sum: float
    bad_counts: dict[float, int]
    d1_bad: int
    fg_valid: int = 0
    fg_bad: int = 0
    bg_valid: int = 0
    bg_bad: int = 0
    has_regions: bool = False


@dataclass(frozen=True)
class EvalResult:
    bad: dict[float, float]
    avgerr: float | None = None
    density: float = 1.0
    samples: int = 1
    d1: float | None = None
    regions: RegionBreakdown | None = None
    tally: PixelTally | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        for tau, value in self.bad.items():
            if not 0.0 <= value <= 100.0:
                raise DomainError(f"bad {tau} = {value} is outside [0, 100]")
        if self.avgerr is not None and self.avgerr < 0:
            raise DomainError(f"avgerr must be >= 0, got {self.avgerr}")

    @classmethod
    def from_tally(cls, tally: PixelTally, samples: int = 1) -> EvalResult:
        if tally.valid == 0:
            raise EmptyEvaluationError("No valid ground-truth pixels to evaluate")
        regions = None
        if tally.has_regions:
            regions = RegionBreakdown(
                all=_percent(tally.fg_bad + tally.bg_bad, tally.fg_valid + tally.bg_valid),
                background=_percent(tally.bg_bad, tally.bg_valid) if tally.bg_valid else None,
                foreground=_percent(tally.fg_bad, tally.fg_valid) if tally.fg_valid else None,
            )
        return cls(
            bad={tau: _percent(n, tally.valid) for tau, n in sorted(tally.bad_counts.items())},
            avgerr=tally.epe_sum / tally.valid,
            density=tally.valid / tally.total if tally.total else 0.0,
            samples=samples,
            d1=_percent(tally.d1_bad, tally.valid),
            regions=regions,
            tally=tally,
        )


def _percent(count: int, total: int) -> float:
    return 100.0 * count / total


def _require_valid(epe: ErrorMap, mask: npt.NDArray[np.bool_] | None = None) -> npt.NDArray[np.float64]:
    selected = epe.valid if mask is None else epe.valid & mask
    if not selected.any():
        raise EmptyEvaluationError("No valid pixels to evaluate")
    return epe.epe[selected]


# ---------- Per-pixel metrics ----------


def end_point_error(pred: DisparityMap, gt: DisparityMap) -> ErrorMap:
    if pred.shape != gt.shape:
        raise DomainError(f"Prediction {pred.shape} and ground truth {gt.shape} differ in size")
    diff = np.abs(pred.values.astype(np.float64) - gt.values.astype(np.float64))
    return ErrorMap(epe=np.where(gt.valid, diff, 0.0), valid=gt.valid.copy())


def bad_tau(epe: ErrorMap, tau: float) -> float:
    """Percentage of valid pixels whose error exceeds ``tau``."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    errors = _require_valid(epe)
    return _percent(int(np.count_nonzero(errors > tau)), errors.size)


def avg_err(epe: ErrorMap) -> float:
    errors = _require_valid(epe)
    return float(math.fsum(errors.tolist()) / errors.size)


def d1_error(
    epe: ErrorMap, gt: DisparityMap, tau: float = 3.0, relative: float = KITTI_D1_RELATIVE
) -> float:
    """KITTI D1: error above ``tau`` px AND above ``relative`` of the true disparity."""
    if epe.epe.shape != gt.shape:
        raise DomainError(f"Error map {epe.epe.shape} and ground truth {gt.shape} differ in size")
    errors = _require_valid(epe)
    truth = np.abs(gt.values.astype(np.float64))[epe.valid]
    outliers = (errors > tau) & (errors > relative * truth)
    return _percent(int(np.count_nonzero(outliers)), errors.size)


def region_eval(epe: ErrorMap, region: RegionMask, tau: float = REGION_TAU) -> RegionBreakdown:
    if region.shape != epe.epe.shape:
        raise DomainError(f"Region mask {region.shape} and error map {epe.epe.shape} differ")
    fg = region.foreground
    everything = bad_tau(epe, tau)
    background = bad_tau(epe_subset(epe, ~fg), tau) if (epe.valid & ~fg).any() else None
    foreground = bad_tau(epe_subset(epe, fg), tau) if (epe.valid & fg).any() else None
    if foreground is None:
        logger.debug("Foreground region is empty; its bad rate is undefined")
    return RegionBreakdown(all=everything, background=background, foreground=foreground, tau=tau)


def epe_subset(epe: ErrorMap, mask: npt.NDArray[np.bool_]) -> ErrorMap:
    return ErrorMap(epe=epe.epe, valid=epe.valid & mask)


def fg_bg_ratio(foreground: float, background: float) -> float:
    if background <= 0:
        raise DomainError(f"Background error must be positive, got {background}")
    return foreground / background


def round_half_up(value: float, places: int = 2) -> Decimal:
    """Round away from zero at the half, as reports print values."""
    return Decimal(repr(value)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


# ---------- Whole-image evaluation ----------


def rescale_ground_truth(gt: DisparityMap, factor: float) -> DisparityMap:
    """Nearest-neighbour subsample to ``factor`` resolution, disparities scaled by ``factor``."""
    if not 0 < factor <= 1:
        raise DomainError(f"Ground-truth scale must be in (0, 1], got {factor}")
    if factor == 1:
        return gt
    h, w = gt.shape
    out_h, out_w = max(1, round(h * factor)), max(1, round(w * factor))
    rows = np.minimum(((np.arange(out_h) + 0.5) / factor).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(out_w) + 0.5) / factor).astype(np.int64), w - 1)
    valid = gt.valid[np.ix_(rows, cols)]
    values = np.where(valid, gt.values[np.ix_(rows, cols)] * np.float32(factor), 0.0)
    return DisparityMap(values=values.astype(np.float32), valid=valid)


def tally_pair(
    pred: DisparityMap,
    gt: DisparityMap,
    thresholds: Iterable[float] = DEFAULT_THRESHOLDS,
    region: RegionMask | None = None,
) -> PixelTally:
    epe = end_point_error(pred, gt)
    errors = epe.epe[epe.valid]
    truth = np.abs(gt.values.astype(np.float64))[epe.valid]
    taus = sorted(set(thresholds))
    if any(t <= 0 for t in taus):
        raise DomainError(f"Thresholds must be positive, got {taus}")
    fg_valid = fg_bad = bg_valid = bg_bad = 0
    if region is not None:
        if region.shape != gt.shape:
            raise DomainError(f"Region mask {region.shape} and ground truth {gt.shape} differ")
        fg = region.foreground[epe.valid]
        bad = errors > REGION_TAU
        fg_valid, fg_bad = int(fg.sum()), int((bad & fg).sum())
        bg_valid, bg_bad = int((~fg).sum()), int((bad & ~fg).sum())
    return PixelTally(
        valid=int(errors.size),
        total=int(gt.valid.size),
        epe_sum=math.fsum(errors.tolist()),
        bad_counts={t: int(np.count_nonzero(errors > t)) for t in taus},
        d1_bad=int(np.count_nonzero((errors > 3.0) & (errors > KITTI_D1_RELATIVE * truth))),
        fg_valid=fg_valid,
        fg_bad=fg_bad,
        bg_valid=bg_valid,
        bg_bad=bg_bad,
        has_regions=region is not None,
    )


def evaluate_pair(
    pred: DisparityMap,
    gt: DisparityMap,
    thresholds: Iterable[float] = DEFAULT_THRESHOLDS,
    region: RegionMask | None = None,
) -> EvalResult:
    """bad-tau for each threshold, avgerr, D1 and (with a region mask) the fg/bg split."""
    return EvalResult.from_tally(tally_pair(pred, gt, thresholds, region))


def aggregate(results: Mapping[str, EvalResult]) -> EvalResult:
    """Pool pixels over samples, summing in sorted sample-id order."""
    if not results:
        raise EmptyEvaluationError("Nothing to aggregate")
    tallies = []
    for key in sorted(results):
        tally = results[key].tally
        if tally is None:
            raise DomainError(f"Result {key} carries no pixel counts and cannot be pooled")
        tallies.append(tally)
    taus = set(tallies[0].bad_counts)
    if any(set(t.bad_counts) != taus for t in tallies):
        raise DomainError("Results were computed with different thresholds")
    has_regions = all(t.has_regions for t in tallies)
    pooled = PixelTally(
        valid=sum(t.valid for t in tallies),
        total=sum(t.total for t in tallies),
        epe_sum=math.fsum(t.epe_sum for t in tallies),
        bad_counts={tau: sum(t.bad_counts[tau] for t in tallies) for tau in sorted(taus)},
        d1_bad=sum(t.d1_bad for t in tallies),
        fg_valid=sum(t.fg_valid for t in tallies) if has_regions else 0,
        fg_bad=sum(t.fg_bad for t in tallies) if has_regions else 0,
        bg_valid=sum(t.bg_valid for t in tallies) if has_regions else 0,
        bg_bad=sum(t.bg_bad for t in tallies) if has_regions else 0,
        has_regions=has_regions,
    )
    logger.info(f"Aggregated {len(tallies)} samples over {pooled.valid} valid pixels")
    return EvalResult.from_tally(pooled, samples=len(tallies))
