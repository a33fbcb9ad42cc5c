from __future__ import annotations

import json

import pytest
from pydantic import ValidationError

from mixstereo.config import FINETUNE_FACTORS, PRETRAIN_FACTORS
from mixstereo.errors import FormatError
from mixstereo.pipeline import ReplicationPolicy, load_policy


class TestBuiltInPolicies:
    def test_pretrain_factors(self):
        policy = load_policy("pretrain")
        assert policy.name == "pretrain"
        assert policy.factors == PRETRAIN_FACTORS

    def test_finetune_factors(self):
        assert load_policy("finetune").factors == FINETUNE_FACTORS

    def test_unknown_name(self):
        with pytest.raises(FormatError, match="Unknown policy"):
            load_policy("nonexistent")

    def test_user_override(self, tmp_path, monkeypatch):
        user_dir = tmp_path / "user"
        user_dir.mkdir()
        (user_dir / "pretrain_policy.json").write_text(
            json.dumps({"name": "pretrain", "factors": {"Sintel": 2}}), encoding="utf-8"
        )
        monkeypatch.setattr("mixstereo.utils._get_home_config_dir", lambda: user_dir)
        assert load_policy("pretrain").factors == {"Sintel": 2}


class TestPolicyFiles:
    def test_load_from_path(self, tmp_path):
        path = tmp_path / "mine.json"
        path.write_text(json.dumps({"name": "mine", "factors": {"a": 4}}), encoding="utf-8")
        policy = load_policy(path)
        assert policy.name == "mine"
        assert policy.factors == {"a": 4}

    def test_zero_factor_in_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"factors": {"a": 0}}), encoding="utf-8")
        with pytest.raises(FormatError, match="Invalid policy file"):
            load_policy(path)

    def test_missing_json_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_policy(tmp_path / "absent.json")


class TestReplicationPolicy:
    def test_factors_must_be_positive(self):
        with pytest.raises(ValidationError, match=">= 1"):
            ReplicationPolicy(factors={"a": 1, "b": 0})

    def test_scaled(self):
        policy = ReplicationPolicy(name="p", factors={"a": 1, "b": 3}).scaled(2)
        assert policy.name == "px2"
        assert policy.factors == {"a": 2, "b": 6}

    def test_frozen(self):
        with pytest.raises(ValidationError):
            ReplicationPolicy().name = "x"  # type: ignore[misc]
