"""Replicated training manifests and seeded epoch sampling.

A manifest lists every (dataset, sample index, copy) triple of one epoch in
catalog order, then sample order, then copy index. Entries are stored as three
parallel integer arrays so full-size manifests stay cheap.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from mixstereo.config import FORMAT_VERSION
from mixstereo.datasets.catalog import Catalog, DatasetDescriptor
from mixstereo.errors import DomainError, FormatError
from mixstereo.pipeline.policy import ReplicationPolicy

logger = logging.getLogger("mixstereo")

Descriptors = Catalog | Sequence[DatasetDescriptor]


class ManifestEntry(NamedTuple):
    dataset: str
    index: int
    copy: int


@dataclass(frozen=True, eq=False)
class TrainingManifest:
    datasets: tuple[str, ...]
    dataset_ids: npt.NDArray[np.int32]
    indices: npt.NDArray[np.int64]
    copies: npt.NDArray[np.int32]
    policy: ReplicationPolicy
    catalog_hash: str

    @property
    def total(self) -> int:
        return int(self.dataset_ids.shape[0])

    def __len__(self) -> int:
        return self.total

    def entry(self, i: int) -> ManifestEntry:
        return ManifestEntry(
            self.datasets[int(self.dataset_ids[i])], int(self.indices[i]), int(self.copies[i])
        )

    def __iter__(self) -> Iterator[ManifestEntry]:
        for i in range(self.total):
            yield self.entry(i)

    def counts(self) -> dict[str, int]:
        per_id = np.bincount(self.dataset_ids, minlength=len(self.datasets))
        return {name: int(n) for name, n in zip(self.datasets, per_id, strict=True)}


def _descriptors(catalog: Descriptors) -> list[DatasetDescriptor]:
    return list(catalog.datasets if isinstance(catalog, Catalog) else catalog)


def _selected(catalog: Descriptors, policy: ReplicationPolicy) -> list[DatasetDescriptor]:
    descriptors = _descriptors(catalog)
    known = {d.name for d in descriptors}
    unknown = sorted(set(policy.factors) - known)
    if unknown:
        raise DomainError(f"Policy names datasets missing from the catalog: {', '.join(unknown)}")
    return [d for d in descriptors if d.name in policy.factors]


def catalog_hash(descriptors: Sequence[DatasetDescriptor]) -> str:
    payload = [d.model_dump(mode="json") for d in descriptors]
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_manifest(catalog: Descriptors, policy: ReplicationPolicy) -> TrainingManifest:
    """Replicate each policy dataset's samples ``factor`` times.

    Catalog datasets the policy does not name are left out.
    """
    selected = _selected(catalog, policy)
    ids, indices, copies = [], [], []
    for dataset_id, descriptor in enumerate(selected):
        n = descriptor.effective_count
        factor = policy.factors[descriptor.name]
        ids.append(np.full(n * factor, dataset_id, dtype=np.int32))
        indices.append(np.repeat(np.arange(n, dtype=np.int64), factor))
        copies.append(np.tile(np.arange(factor, dtype=np.int32), n))
    manifest = TrainingManifest(
        datasets=tuple(d.name for d in selected),
        dataset_ids=np.concatenate(ids) if ids else np.zeros(0, dtype=np.int32),
        indices=np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
        copies=np.concatenate(copies) if copies else np.zeros(0, dtype=np.int32),
        policy=policy,
        catalog_hash=catalog_hash(selected),
    )
    logger.info(f"Built {policy.name} manifest: {manifest.total} entries from {len(selected)} datasets")
    return manifest


def manifest_total(catalog: Descriptors, policy: ReplicationPolicy) -> int:
    """Closed-form entry count of ``build_manifest(catalog, policy)``."""
    return sum(d.effective_count * policy.factors[d.name] for d in _selected(catalog, policy))


def expected_proportions(catalog: Descriptors, policy: ReplicationPolicy) -> dict[str, float]:
    """Share of each dataset in one replicated epoch."""
    selected = _selected(catalog, policy)
    weighted = {d.name: d.effective_count * policy.factors[d.name] for d in selected}
    total = sum(weighted.values())
    if total == 0:
        raise DomainError("Policy selects no samples")
    return {name: n / total for name, n in weighted.items()}


def swap_targets(bitgen: np.random.PCG64, n: int) -> list[int]:
    """Fisher-Yates swap targets for positions n-1 .. 1, from raw 64-bit outputs.

    Target k is uniform on [0, n-1-k]: a raw draw r is kept when it lies below
    the largest multiple of the bound and reduced modulo it. Rejected draws are
    replaced, in position order, by further draws taken after the batch.
    """
    if n < 2:
        return []
    bounds = np.arange(n, 1, -1, dtype=np.uint64)
    raw = bitgen.random_raw(n - 1)
    # 2**64 mod b, computed with wrapping uint64 arithmetic
    spill = (np.uint64(0) - bounds) % bounds
    rejected = (spill != 0) & (raw >= np.uint64(0) - spill)
    targets = (raw % bounds).tolist()
    for k in np.flatnonzero(rejected).tolist():
        bound = n - k
        limit = 2**64 - (2**64 % bound)
        draw = int(bitgen.random_raw())
        while draw >= limit:
            draw = int(bitgen.random_raw())
        targets[k] = draw % bound
    return targets


def epoch_order(manifest: TrainingManifest, seed: int) -> npt.NDArray[np.int64]:
    """Seeded Fisher-Yates permutation of manifest positions.

    Only the PCG64 raw output stream is consumed, so the order depends on the
    seed alone and not on numpy's Generator sampling routines.
    """
    n = manifest.total
    order = list(range(n))
    for k, j in enumerate(swap_targets(np.random.PCG64(seed), n)):
        i = n - 1 - k
        order[i], order[j] = order[j], order[i]
    return np.asarray(order, dtype=np.int64)


def sample_epoch(manifest: TrainingManifest, seed: int) -> Iterator[ManifestEntry]:
    """Visit every manifest entry exactly once in a seeded shuffled order."""
    for i in epoch_order(manifest, seed):
        yield manifest.entry(int(i))


def sample_rng(seed: int, key: str) -> np.random.Generator:
    """Independent per-sample generator derived from the global seed and a sample id."""
    digest = hashlib.blake2b(f"{seed}:{key}".encode(), digest_size=16).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))


# ---------- Persistence ----------


def save_manifest(path: str | Path, manifest: TrainingManifest) -> None:
    """JSON lines: a header object, then one ``{"dataset", "index", "copy"}`` per entry."""
    header = {
        "format_version": FORMAT_VERSION,
        "total": manifest.total,
        "datasets": list(manifest.datasets),
        "policy": manifest.policy.model_dump(mode="json"),
        "catalog_hash": manifest.catalog_hash,
    }
    names = [json.dumps(n) for n in manifest.datasets]
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for d, i, c in zip(
            manifest.dataset_ids.tolist(),
            manifest.indices.tolist(),
            manifest.copies.tolist(),
            strict=True,
        ):
            f.write(f'{{"dataset": {names[d]}, "index": {i}, "copy": {c}}}\n')
    logger.info(f"Wrote {manifest.total} manifest entries to {path}")


def load_manifest(path: str | Path) -> TrainingManifest:
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise FormatError(f"Empty manifest: {path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise FormatError(f"Malformed manifest header in {path}: {e}") from e
    if not isinstance(header, dict) or header.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"Unsupported manifest version in {path}")
    try:
        datasets = tuple(header["datasets"])
        lookup = {name: i for i, name in enumerate(datasets)}
        rows = [json.loads(line) for line in lines[1:] if line.strip()]
        ids = np.array([lookup[r["dataset"]] for r in rows], dtype=np.int32)
        indices = np.array([r["index"] for r in rows], dtype=np.int64)
        copies = np.array([r["copy"] for r in rows], dtype=np.int32)
        policy = ReplicationPolicy.model_validate(header["policy"])
        catalog_digest = str(header["catalog_hash"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise FormatError(f"Malformed manifest {path}: {e}") from e
    if len(rows) != header["total"]:
        raise FormatError(f"Manifest {path} declares {header['total']} entries, has {len(rows)}")
    return TrainingManifest(
        datasets=datasets,
        dataset_ids=ids,
        indices=indices,
        copies=copies,
        policy=policy,
        catalog_hash=catalog_digest,
    )
