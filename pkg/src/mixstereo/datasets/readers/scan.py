from __future__ import annotations

import logging

from mixstereo.datasets.catalog import DatasetDescriptor
from mixstereo.datasets.readers.registry import get_reader
from mixstereo.datasets.types import SampleRef

logger = logging.getLogger("mixstereo")


def scan_dataset(descriptor: DatasetDescriptor, check_count: bool = True) -> list[SampleRef]:
    """Enumerate a dataset's samples with the reader its descriptor names.

    Ordering is lexicographic by frame id and stable across runs. A count that
    differs from the published one is logged, not rejected.
    """
    refs = get_reader(descriptor.reader).scan(descriptor)
    logger.info(f"Scanned {descriptor.name}: {len(refs)} samples under {descriptor.root}")
    if check_count and refs and len(refs) != descriptor.count:
        logger.warning(
            f"{descriptor.name}: scanned {len(refs)} samples, published count is {descriptor.count}"
        )
    return refs
