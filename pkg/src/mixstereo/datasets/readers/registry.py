from __future__ import annotations

from mixstereo.datasets.readers.base import DatasetReader
from mixstereo.errors import DomainError

_registry: dict[str, type[DatasetReader]] = {}
_builtins_loaded = False


def _load_builtins() -> None:
    global _builtins_loaded
    if _builtins_loaded:
        return
    # Built-in reader modules self-register on import
    import mixstereo.datasets.readers.benchmarks  # noqa: F401
    import mixstereo.datasets.readers.synthetic  # noqa: F401

    _builtins_loaded = True


def register(kind: str, reader_cls: type[DatasetReader]) -> None:
    """Register a dataset reader class under the given kind."""
    _registry[kind.strip().lower()] = reader_cls


def get_reader(kind: str) -> DatasetReader:
    """Get an instance of the registered reader for ``kind``."""
    _load_builtins()
    key = kind.strip().lower()
    if key not in _registry:
        supported = ", ".join(sorted(_registry.keys()))
        raise DomainError(f"Unknown reader kind: {kind}. Supported: {supported}")
    return _registry[key]()


def list_readers() -> list[str]:
    """List all registered reader kinds."""
    _load_builtins()
    return sorted(_registry.keys())
