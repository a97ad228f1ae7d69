"""
Tests for layered settings loading.
"""
import pytest

from src.services.exceptions import StructureError
from src.utils.config import load_settings


def test_defaults():
    """No file, no environment: the model defaults."""
    settings = load_settings(env={})
    assert settings.seed == 0
    assert settings.oracle_cap == 4096


def test_layers(tmp_path):
    """File, then environment, then explicit overrides."""
    path = tmp_path / "forge.toml"
    path.write_text("seed = 5\noracle_cap = 100\nsample_paths = 30\n")

    assert load_settings(path, env={}).seed == 5
    settings = load_settings(path, env={"FORGE_SEED": "9"})
    assert settings.seed == 9
    assert settings.oracle_cap == 100
    settings = load_settings(path, env={"FORGE_SEED": "9"}, overrides={"seed": 11, "jobs": None})
    assert settings.seed == 11
    assert settings.jobs == 0
    assert settings.sample_paths == 30


def test_bad_environment_value():
    """Environment overrides must be integers."""
    with pytest.raises(StructureError):
        load_settings(env={"FORGE_ORACLE_CAP": "lots"})


def test_unknown_key(tmp_path):
    """Settings files may only name known fields."""
    path = tmp_path / "forge.toml"
    path.write_text("colour = 1\n")
    with pytest.raises(StructureError):
        load_settings(path, env={})


def test_invalid_value_and_missing_file(tmp_path):
    """Negative caps and unreadable files are input errors."""
    with pytest.raises(StructureError):
        load_settings(env={}, overrides={"oracle_cap": 0})
    with pytest.raises(StructureError):
        load_settings(tmp_path / "missing.toml", env={})
