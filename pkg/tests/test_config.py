"""
配置加载测试
"""

from pathlib import Path

import pytest
import yaml

from core.config import Settings, get_settings, load_settings, reset_settings
from core.errors import ConfigError

ROOT = Path(__file__).resolve().parent.parent


def _write(tmp_path, content, name="config.yaml"):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return str(path)


def test_missing_default_falls_back_to_defaults():
    settings = load_settings()
    assert settings == Settings()
    assert settings.runtime.threads == 4
    assert settings.distill.corr_values == [1.0, 0.8, 0.5, 0.0, -0.5, -1.0]
    assert settings.oracle.family_wise is False


def test_explicit_missing_path_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(str(tmp_path / "nope.yaml"))


def test_shipped_config_matches_defaults():
    assert load_settings(str(ROOT / "config.yaml")) == Settings()


def test_partial_file_keeps_other_defaults(tmp_path):
    path = _write(tmp_path, "oracle:\n  n_sigma: 4.0\ndistill:\n  model: cP\n")
    settings = load_settings(path)
    assert settings.oracle.n_sigma == 4.0
    assert settings.distill.model == "cP"
    assert settings.oracle.seed == 7
    assert settings.linalg.defect_threshold == 1e8


def test_empty_file_gives_defaults(tmp_path):
    assert load_settings(_write(tmp_path, "")) == Settings()


def test_malformed_yaml_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(_write(tmp_path, "runtime: [threads: 2\n"))


@pytest.mark.parametrize("content, field", [
    ("runtime:\n  threads: 0\n", "runtime.threads"),
    ("oracle:\n  n_steps: 10\n", "oracle.n_steps"),
    ("distill:\n  convention: diagonal\n", "distill.convention"),
    ("distill:\n  model: c3\n", "distill.model"),
    ("linalg:\n  unknown: 1\n", "linalg.unknown"),
])
def test_invalid_field_is_named(tmp_path, content, field):
    with pytest.raises(ConfigError) as excinfo:
        load_settings(_write(tmp_path, content))
    assert excinfo.value.field == field
    assert excinfo.value.to_dict()["details"]["field"] == field


def test_environment_references_are_resolved(tmp_path, monkeypatch):
    monkeypatch.setenv("LIEGAUSS_TEST_OUTPUT", str(tmp_path / "out"))
    path = _write(tmp_path, "runtime:\n  output_dir: ${LIEGAUSS_TEST_OUTPUT}\n  logs_dir: ${LIEGAUSS_UNSET_VAR}\n")
    settings = load_settings(path)
    assert settings.runtime.output_dir == str(tmp_path / "out")
    assert settings.runtime.logs_dir == "${LIEGAUSS_UNSET_VAR}"


def test_config_path_from_environment(tmp_path, monkeypatch):
    path = _write(tmp_path, "montecarlo:\n  chunk_size: 500\n", name="env.yaml")
    monkeypatch.setenv("LIEGAUSS_CONFIG", path)
    assert load_settings().montecarlo.chunk_size == 500


@pytest.mark.parametrize("cap, expected", [(None, 4), ("2", 2), ("16", 4), ("0", 1), ("many", 4)])
def test_effective_threads(monkeypatch, cap, expected):
    if cap is not None:
        monkeypatch.setenv("LIEGAUSS_THREADS", cap)
    assert Settings().runtime.effective_threads() == expected


def test_get_settings_is_cached(tmp_path):
    first = get_settings()
    assert get_settings() is first
    reset_settings()
    path = _write(tmp_path, "equivalence:\n  grid: 10\n")
    assert get_settings(path).equivalence.grid == 10


def test_settings_dump_round_trip(tmp_path):
    settings = Settings()
    path = _write(tmp_path, yaml.safe_dump(settings.model_dump()))
    assert load_settings(path) == settings
