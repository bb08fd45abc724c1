"""
等价类扫描与特征值轨迹命令：equiv-scan、eig-trace
"""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import Field, field_validator, model_validator
from typing_extensions import Self

from commands import resolve_output
from core.channel1q import NormalParams1Q, equivalence_class_info, eigenvalue_trace
from core.commands import BaseCommand, RunConfig, RunContext, register_command
from core.config import Settings
from core.errors import ExceptionalPointError
from core.export import build_metadata, export_table
from core.linalg import symmetric_psd
from core.parallel import TaskError, run_ordered

SCAN_COLUMNS = ["A11", "A22", "A33", "count", "infinite_flag"]


def _unit(vector: List[float]) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    return v / np.linalg.norm(v)


def _check_direction(value: List[float]) -> List[float]:
    if len(value) != 3 or not np.all(np.isfinite(value)):
        raise ValueError("必须是三维有限向量")
    if np.linalg.norm(value) < 1e-12:
        raise ValueError("不能是零向量")
    return value


def simplex_grid(resolution: int) -> List[Tuple[int, int, int]]:
    """tr A = 1 平面上的重心网格 (i, j, k)，i + j + k = resolution，按 i、j 升序"""
    return [(i, j, resolution - i - j) for i in range(resolution + 1) for j in range(resolution + 1 - i)]


class EquivScanConfig(RunConfig):
    """equiv-scan 命令的运行配置"""
    grid: int = Field(default=60, ge=2, description="重心网格分辨率")
    k_max: int = Field(default=6, ge=0, description="最大对数分支序号")
    max_members: Optional[int] = Field(default=12, ge=1, description="报告的成员数上限")
    b_dir: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0], description="漂移方向")
    b_norm: float = Field(default=1.0, ge=0.0, description="漂移大小")

    @field_validator("b_dir")
    @classmethod
    def _check_b_dir(cls, value: List[float]) -> List[float]:
        return _check_direction(value)

    @property
    def b(self) -> np.ndarray:
        return self.b_norm * _unit(self.b_dir)


def _scan_point(args) -> Tuple[int, bool]:
    (i, j, k), resolution, b, k_max, defect_threshold, pair_tol = args
    params = NormalParams1Q(A=np.diag([i, j, k]) / resolution, b=b)
    try:
        info = equivalence_class_info(
            params, k_max, max_members=None, defect_threshold=defect_threshold, pair_tol=pair_tol
        )
    except ExceptionalPointError:
        return -1, False
    return info.count, info.infinite


@register_command
class EquivScanCommand(BaseCommand):
    """等价类规模扫描"""

    name = "equiv-scan"
    description = "在 tr A = 1 的对角 A 平面上扫描诱导同一信道的正规分布个数"
    config_model = EquivScanConfig

    def default_config(self, settings: Settings) -> Dict[str, Any]:
        return settings.equivalence.model_dump()

    def execute(self, config: EquivScanConfig, context: RunContext) -> Dict[str, Any]:
        linalg = context.settings.linalg
        points = simplex_grid(config.grid)
        b = config.b
        tasks = [(pt, config.grid, b, config.k_max, linalg.defect_threshold, linalg.pair_tol) for pt in points]
        results = run_ordered(_scan_point, tasks, on_done=context.progress(self.name))

        rows = []
        exceptional = 0
        failed = 0
        for (i, j, k), result in zip(points, results):
            if isinstance(result, TaskError):
                failed += 1
                count, infinite = -1, False
                if context.state is not None:
                    context.state.log_warning(f"网格点 ({i}, {j}, {k}) 计算失败: {result.error}")
            else:
                count, infinite = result
            if count == -1:
                exceptional += 1
            elif config.max_members is not None:
                count = min(count, config.max_members)
            rows.append({
                "A11": i / config.grid,
                "A22": j / config.grid,
                "A33": k / config.grid,
                "count": int(count),
                "infinite_flag": int(bool(infinite)),
            })
        df = pd.DataFrame(rows, columns=SCAN_COLUMNS)

        path = resolve_output(context, self.name, context.export_format)
        metadata = build_metadata(self.name, config.model_dump(mode="json"))
        export_info = export_table(df, path, metadata, context.export_format)
        if context.state is not None:
            context.state.add_output(export_info["file_path"])

        print(f"✓ 扫描 {len(df)} 个网格点，奇异点 {exceptional} 个，最大成员数 {int(df['count'].max())}")
        return {
            "success": failed == 0,
            "result": {
                "points": len(df),
                "exceptional_points": exceptional,
                "max_count": int(df["count"].max()),
                "infinite_points": int(df["infinite_flag"].sum()),
                "export_info": export_info,
                "table": df,
            },
            "error": None if failed == 0 else f"{failed} 个网格点计算失败",
        }


class EigTraceConfig(RunConfig):
    """eig-trace 命令的运行配置"""
    A_diag: List[float] = Field(default_factory=lambda: [0.6, 0.3, 0.1], description="对角扩散矩阵")
    A: Optional[List[List[float]]] = Field(default=None, description="完整扩散矩阵，给出时覆盖 A_diag")
    b_dir: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0], description="漂移方向")
    m_start: float = Field(default=0.0, ge=0.0)
    m_stop: float = Field(default=1.0, ge=0.0)
    m_num: int = Field(default=101, ge=2)

    @field_validator("b_dir")
    @classmethod
    def _check_b_dir(cls, value: List[float]) -> List[float]:
        return _check_direction(value)

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.m_stop < self.m_start:
            raise ValueError("m_stop 必须不小于 m_start")
        symmetric_psd(self.matrix(), "A", 3)
        return self

    def matrix(self) -> np.ndarray:
        if self.A is not None:
            return np.asarray(self.A, dtype=float)
        if len(self.A_diag) != 3:
            raise ValueError("A_diag 必须有 3 个分量")
        return np.diag(np.asarray(self.A_diag, dtype=float))


@register_command
class EigTraceCommand(BaseCommand):
    """生成元特征值轨迹"""

    name = "eig-trace"
    description = "追踪固定 A 下生成元特征值随 |b| 的变化，并给出共轭对出现的位置"
    config_model = EigTraceConfig

    def default_config(self, settings: Settings) -> Dict[str, Any]:
        return settings.eig_trace.model_dump()

    def execute(self, config: EigTraceConfig, context: RunContext) -> Dict[str, Any]:
        magnitudes = np.linspace(config.m_start, config.m_stop, config.m_num)
        trace = eigenvalue_trace(config.matrix(), _unit(config.b_dir), magnitudes)

        rows = []
        for point in trace.points:
            row: Dict[str, Any] = {"b_norm": point.magnitude}
            for n, value in enumerate(point.eigenvalues, start=1):
                row[f"re_{n}"] = float(value.real)
                row[f"im_{n}"] = float(value.imag)
            row["paired"] = int(point.paired)
            rows.append(row)
        df = pd.DataFrame(rows)

        path = resolve_output(context, self.name, context.export_format)
        metadata = build_metadata(self.name, config.model_dump(mode="json"), pair_onset=trace.pair_onset)
        export_info = export_table(df, path, metadata, context.export_format)
        if context.state is not None:
            context.state.add_output(export_info["file_path"])

        onset = "无" if trace.pair_onset is None else f"{trace.pair_onset:.6g}"
        print(f"✓ 特征值轨迹 {len(df)} 点，共轭对出现于 |b| = {onset}")
        return {
            "success": True,
            "result": {"pair_onset": trace.pair_onset, "export_info": export_info, "table": df},
            "error": None,
        }
