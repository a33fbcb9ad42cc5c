"""Dataset catalog: which datasets exist, how many frames each holds, where they live."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from mixstereo.config import FORMAT_VERSION
from mixstereo.errors import DomainError, FormatError
from mixstereo.utils import load_builtin_json

logger = logging.getLogger("mixstereo")

CatalogKind = Literal["pretrain", "finetune", "all"]


class DatasetDescriptor(BaseModel):
    """One dataset entry.

    ``count`` is the published frame count; ``scanned_count`` is filled in by a
    scan of ``root`` and takes precedence when present. ``options`` carries
    reader-specific settings (passes, disparity scale, camera fx/baseline).
    """

    model_config = ConfigDict(frozen=True)

    name: str
    type: Literal["Synthetic", "Realistic"]
    count: int = Field(gt=0)
    resolution: tuple[int, int] | None = None
    root: str | None = None
    reader: str
    scanned_count: int | None = Field(default=None, ge=0)
    options: dict[str, Any] = Field(default_factory=dict)

    @property
    def effective_count(self) -> int:
        return self.count if self.scanned_count is None else self.scanned_count

    def option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


class Catalog(BaseModel):
    format_version: int = FORMAT_VERSION
    datasets: list[DatasetDescriptor] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_names(self) -> Catalog:
        names = [d.name for d in self.datasets]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValueError(f"duplicate dataset names: {', '.join(dupes)}")
        return self

    def names(self) -> list[str]:
        return [d.name for d in self.datasets]

    def get(self, name: str) -> DatasetDescriptor:
        for d in self.datasets:
            if d.name == name:
                return d
        raise DomainError(f"Unknown dataset: {name}. Known: {', '.join(self.names())}")

    def __contains__(self, name: object) -> bool:
        return any(d.name == name for d in self.datasets)

    def replace(self, descriptor: DatasetDescriptor) -> Catalog:
        """Return a copy with ``descriptor`` swapped in by name, or appended if new."""
        datasets = [descriptor if d.name == descriptor.name else d for d in self.datasets]
        if descriptor.name not in self:
            datasets.append(descriptor)
        return Catalog(format_version=self.format_version, datasets=datasets)


def load_catalog(path: str | Path) -> Catalog:
    text = Path(path).read_text(encoding="utf-8")
    try:
        catalog = Catalog.model_validate_json(text)
    except ValidationError as e:
        raise FormatError(f"Invalid catalog {path}: {e}") from e
    logger.debug(f"Loaded catalog {path} with {len(catalog.datasets)} datasets")
    return catalog


def save_catalog(path: str | Path, catalog: Catalog) -> None:
    Path(path).write_text(catalog.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote catalog with {len(catalog.datasets)} datasets to {path}")


def default_catalog(kind: CatalogKind = "pretrain") -> Catalog:
    """Built-in catalog with published counts (user copy in ~/.mixstereo/configs wins)."""
    if kind == "all":
        pre = default_catalog("pretrain")
        fine = default_catalog("finetune")
        return Catalog(datasets=pre.datasets + fine.datasets)
    if kind not in ("pretrain", "finetune"):
        raise DomainError(f"Unknown catalog kind: {kind}")
    data = load_builtin_json("datasets", f"{kind}_catalog.json")
    try:
        return Catalog.model_validate(data)
    except ValidationError as e:
        raise FormatError(f"Invalid built-in {kind} catalog: {e}") from e
