# Ensure the repository root and src/ are on sys.path for test imports
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in [str(ROOT), str(SRC)]:
    if p not in sys.path:
        sys.path.insert(0, p)

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from mixstereo.config import ArchitectureDescriptor  # noqa: E402
from mixstereo.model.weights import ModelWeights, init_weights  # noqa: E402


@pytest.fixture(autouse=True)
def _isolate_user_configs(tmp_path, monkeypatch):
    """Keep a developer's ~/.mixstereo/configs from leaking into tests."""
    monkeypatch.setattr(
        "mixstereo.utils._get_home_config_dir", lambda: tmp_path / "no-user-configs"
    )
    monkeypatch.delenv("MIXSTEREO_CATALOG", raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_arch() -> ArchitectureDescriptor:
    return ArchitectureDescriptor(
        feature_channels=32,
        encoder_channels=(8, 8),
        hidden_channels=4,
        gru_levels=3,
        corr_levels=2,
        corr_radius=2,
        motion_channels=4,
        head_channels=8,
        iters=4,
    )


@pytest.fixture(scope="session")
def tiny_weights(tiny_arch) -> ModelWeights:
    return init_weights(tiny_arch, seed=7)
