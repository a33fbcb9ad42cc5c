__all__ = [
    "ManifestEntry",
    "ReplicationPolicy",
    "TrainingManifest",
    "build_manifest",
    "epoch_fraction",
    "expected_proportions",
    "load_manifest",
    "load_policy",
    "make_schedule",
    "manifest_total",
    "sample_epoch",
    "sample_rng",
    "save_manifest",
]

from .manifest import (
    ManifestEntry,
    TrainingManifest,
    build_manifest,
    expected_proportions,
    load_manifest,
    manifest_total,
    sample_epoch,
    sample_rng,
    save_manifest,
)
from .policy import ReplicationPolicy, load_policy
from .schedule import epoch_fraction, make_schedule
