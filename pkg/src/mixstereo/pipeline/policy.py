from __future__ import annotations

import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from mixstereo.config import FORMAT_VERSION
from mixstereo.errors import FormatError
from mixstereo.utils import load_builtin_json

logger = logging.getLogger("mixstereo")


class ReplicationPolicy(BaseModel):
    """Per-dataset integer copy factors used to rebalance a mixed corpus."""

    model_config = ConfigDict(frozen=True)

    format_version: int = FORMAT_VERSION
    name: str = "custom"
    factors: dict[str, int] = Field(default_factory=dict)

    @field_validator("factors")
    @classmethod
    def _factors_positive(cls, v: dict[str, int]) -> dict[str, int]:
        bad = sorted(name for name, f in v.items() if f < 1)
        if bad:
            raise ValueError(f"copy factors must be >= 1: {', '.join(bad)}")
        return v

    def scaled(self, k: int) -> ReplicationPolicy:
        return ReplicationPolicy(
            name=f"{self.name}x{k}", factors={n: f * k for n, f in self.factors.items()}
        )


def load_policy(name_or_path: str | Path) -> ReplicationPolicy:
    """Load a policy from a JSON file path, or a built-in one by name.

    Built-in names resolve to ``{name}_policy.json``, looked up first in
    ~/.mixstereo/configs/ and then in the package.
    """
    path = Path(name_or_path)
    if path.suffix == ".json" or path.is_file():
        data = path.read_text(encoding="utf-8")
        try:
            policy = ReplicationPolicy.model_validate_json(data)
        except ValidationError as e:
            raise FormatError(f"Invalid policy file {path}: {e}") from e
        logger.debug(f"Loaded policy {policy.name} from {path}")
        return policy
    try:
        return ReplicationPolicy.model_validate(
            load_builtin_json("pipeline", f"{name_or_path}_policy.json")
        )
    except FileNotFoundError as e:
        raise FormatError(f"Unknown policy: {name_or_path}") from e
    except ValidationError as e:
        raise FormatError(f"Invalid built-in policy {name_or_path}: {e}") from e
