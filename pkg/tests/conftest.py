"""
测试公共夹具
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.config import RuntimeSettings, Settings, reset_settings  # noqa: E402

settings.register_profile("liegauss", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=5, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "liegauss"))


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """每个测试使用独立的默认配置，不写日志文件，输出到临时目录"""
    reset_settings()
    monkeypatch.delenv("LIEGAUSS_THREADS", raising=False)
    monkeypatch.setenv("LIEGAUSS_CONFIG", str(tmp_path / "missing.yaml"))
    yield
    reset_settings()


@pytest.fixture
def test_settings(tmp_path) -> Settings:
    """日志关闭、输出写入临时目录的配置"""
    return Settings(runtime=RuntimeSettings(
        threads=2,
        logs_dir=str(tmp_path / "logs"),
        output_dir=str(tmp_path / "outputs"),
        log_files=False,
    ))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def random_psd(rng):
    """随机半正定矩阵 G·Gᵀ 的工厂"""
    def _make(dim: int, scale: float = 1.0) -> np.ndarray:
        G = rng.normal(size=(dim, dim)) * np.sqrt(scale / dim)
        return G @ G.T
    return _make
