"""
配置加载模块
读取 config.yaml，解析 ${ENV} 引用，并校验为 Pydantic 模型
"""

import os
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.errors import ConfigError

# 加载环境变量
load_dotenv()

DEFAULT_CONFIG_PATH = "config.yaml"
THREADS_ENV = "LIEGAUSS_THREADS"
CONFIG_ENV = "LIEGAUSS_CONFIG"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RuntimeSettings(_Section):
    """运行时配置"""
    threads: int = Field(default=4, ge=1)
    logs_dir: str = "logs"
    output_dir: str = "outputs"
    log_files: bool = True

    def effective_threads(self) -> int:
        """线程数，受环境变量 LIEGAUSS_THREADS 限制"""
        cap = os.getenv(THREADS_ENV)
        if cap:
            try:
                return max(1, min(self.threads, int(cap)))
            except ValueError:
                print(f"⚠️  忽略无效的 {THREADS_ENV}={cap!r}")
        return self.threads


class LinalgSettings(_Section):
    """线性代数容差"""
    defect_threshold: float = Field(default=1e8, gt=1.0)
    pair_tol: float = Field(default=1e-8, gt=0.0)


class MonteCarloSettings(_Section):
    """随机游走采样配置"""
    chunk_size: int = Field(default=25_000, ge=100)


class EquivalenceSettings(_Section):
    """等价类扫描配置"""
    grid: int = Field(default=60, ge=2)
    k_max: int = Field(default=6, ge=0)
    max_members: Optional[int] = Field(default=12, ge=1)
    b_dir: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0])
    b_norm: float = Field(default=1.0, ge=0.0)


class EigTraceSettings(_Section):
    """特征值轨迹配置"""
    A_diag: List[float] = Field(default_factory=lambda: [0.6, 0.3, 0.1])
    b_dir: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0])
    m_start: float = 0.0
    m_stop: float = 1.0
    m_num: int = Field(default=101, ge=2)


class DistillSettings(_Section):
    """蒸馏协议配置"""
    convention: str = "standard"
    check_invariants: bool = False
    model: str = "c2"
    p_values: List[float] = Field(default_factory=lambda: [round(0.0125 * i, 4) for i in range(21)])
    corr_values: List[float] = Field(default_factory=lambda: [1.0, 0.8, 0.5, 0.0, -0.5, -1.0])

    @field_validator("convention")
    @classmethod
    def _check_convention(cls, value: str) -> str:
        if value not in ("standard", "mirrored", "auto"):
            raise ValueError("convention 必须是 standard、mirrored 或 auto")
        return value

    @field_validator("model")
    @classmethod
    def _check_model(cls, value: str) -> str:
        if value not in ("cP", "c2"):
            raise ValueError("model 必须是 cP 或 c2")
        return value


class OracleSettings(_Section):
    """蒙特卡洛验证配置"""
    n_sigma: float = Field(default=3.0, gt=0.0)
    family_wise: bool = False
    n_samples: int = Field(default=100_000, ge=1000)
    n_steps: int = Field(default=100, ge=50)
    seed: int = Field(default=7, ge=0)


class Settings(_Section):
    """全部配置"""
    runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)
    linalg: LinalgSettings = Field(default_factory=LinalgSettings)
    montecarlo: MonteCarloSettings = Field(default_factory=MonteCarloSettings)
    equivalence: EquivalenceSettings = Field(default_factory=EquivalenceSettings)
    eig_trace: EigTraceSettings = Field(default_factory=EigTraceSettings)
    distill: DistillSettings = Field(default_factory=DistillSettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)


def _resolve_env_vars(value: Any) -> Any:
    """递归解析 ${ENV} 引用，未设置的变量保留原值"""
    if isinstance(value, dict):
        return {k: _resolve_env_vars(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve_env_vars(v) for v in value]
    if isinstance(value, str) and value.startswith("${") and value.endswith("}"):
        env_var = value[2:-1]
        return os.getenv(env_var, value)
    return value


def _first_error_field(exc: ValidationError) -> str:
    errors = exc.errors()
    if not errors:
        return ""
    return ".".join(str(part) for part in errors[0].get("loc", ()))


def load_settings(config_path: Optional[str] = None) -> Settings:
    """
    读取并校验配置文件

    Args:
        config_path: 配置文件路径，默认取 LIEGAUSS_CONFIG 或 config.yaml

    Returns:
        Settings 对象；文件不存在时返回默认配置
    """
    path = config_path or os.getenv(CONFIG_ENV, DEFAULT_CONFIG_PATH)
    raw: Dict[str, Any] = {}
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"配置文件 {path} 解析失败: {e}")
    elif config_path:
        raise ConfigError(f"配置文件不存在: {path}")

    try:
        return Settings.model_validate(_resolve_env_vars(raw))
    except ValidationError as e:
        field = _first_error_field(e)
        raise ConfigError(f"配置项 {field} 无效: {e.errors()[0].get('msg', '')}", field=field)


# 全局配置实例
_settings: Optional[Settings] = None


def get_settings(config_path: Optional[str] = None) -> Settings:
    """
    获取全局配置（单例模式）

    Args:
        config_path: 配置文件路径

    Returns:
        Settings 实例
    """
    global _settings
    if _settings is None:
        _settings = load_settings(config_path)
    return _settings


def reset_settings() -> None:
    """清除全局配置（测试用）"""
    global _settings
    _settings = None
