"""Two-phase training plan, emitted as configuration only."""

from __future__ import annotations

import logging
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from mixstereo.config import (
    BATCH_SIZE,
    CROP_SIZE,
    FINETUNE_MIN_LR,
    FINETUNE_STEPS,
    FORMAT_VERSION,
    PRETRAIN_MIN_LR,
    PRETRAIN_STEPS,
    PhaseConfig,
)
from mixstereo.errors import DomainError, FormatError

logger = logging.getLogger("mixstereo")


class Schedule(BaseModel):
    format_version: int = FORMAT_VERSION
    phases: list[PhaseConfig] = Field(default_factory=list)


def make_schedule(
    pretrain_policy: str = "pretrain", finetune_policy: str = "finetune"
) -> tuple[PhaseConfig, PhaseConfig]:
    pretrain = PhaseConfig(
        name="pretrain",
        steps=PRETRAIN_STEPS,
        batch_size=BATCH_SIZE,
        crop_size=CROP_SIZE,
        min_lr=PRETRAIN_MIN_LR,
        policy=pretrain_policy,
    )
    finetune = PhaseConfig(
        name="finetune",
        steps=FINETUNE_STEPS,
        batch_size=BATCH_SIZE,
        crop_size=CROP_SIZE,
        min_lr=FINETUNE_MIN_LR,
        policy=finetune_policy,
    )
    return pretrain, finetune


def epoch_fraction(phase: PhaseConfig, total: int) -> float:
    """How many passes over a ``total``-entry manifest the phase consumes."""
    if total <= 0:
        raise DomainError(f"Manifest total must be positive, got {total}")
    return phase.samples_consumed / total


def _format_lr(lr: float) -> str:
    mantissa, exponent = f"{lr:.0e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def plan_summary(phases: tuple[PhaseConfig, ...], totals: dict[str, int]) -> list[str]:
    """Human-readable plan lines; ``totals`` maps phase name to its manifest size."""
    lines = []
    for phase in phases:
        h, w = phase.crop_size
        lines.append(
            f"{phase.name}: {phase.steps} steps, batch {phase.batch_size}, crop {h}x{w}, "
            f"min lr {_format_lr(phase.min_lr)}, policy {phase.policy}"
        )
        total = totals.get(phase.name)
        if total:
            fraction = epoch_fraction(phase, total)
            lines.append(f"{phase.name} covers {fraction:.2f} epochs of {total} samples")
    return lines


def save_schedule(path: str | Path, phases: tuple[PhaseConfig, ...]) -> None:
    schedule = Schedule(phases=list(phases))
    Path(path).write_text(schedule.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(phases)}-phase schedule to {path}")


def load_schedule(path: str | Path) -> tuple[PhaseConfig, ...]:
    try:
        schedule = Schedule.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise FormatError(f"Invalid schedule {path}: {e}") from e
    return tuple(schedule.phases)
