"""
蒸馏保真度扫描命令：distill
"""

from typing import Any, Dict, List, Literal

import numpy as np
from pydantic import Field, field_validator, model_validator
from typing_extensions import Self

from commands import resolve_output
from core.commands import BaseCommand, RunConfig, RunContext, register_command
from core.config import Settings
from core.distill import convention_checkpoint, fidelity_sweep, resolve_convention
from core.export import build_metadata, export_table


class DistillConfig(RunConfig):
    """distill 命令的运行配置"""
    model: Literal["cP", "c2"] = Field(default="c2", description="cP：关联 Pauli（corr = m）；c2：关联正规（corr = ρ）")
    p_values: List[float] = Field(default_factory=lambda: [0.1], description="各向同性误差概率")
    corr_values: List[float] = Field(default_factory=lambda: [0.0], description="关联参数")
    convention: Literal["standard", "mirrored", "auto"] = Field(default="standard", description="双边 CNOT 电路约定")
    check_invariants: bool = Field(default=False, description="先运行电路约定检查点")

    @field_validator("p_values")
    @classmethod
    def _check_p(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("至少需要一个 p")
        for p in value:
            if not 0.0 <= p <= 0.25:
                raise ValueError(f"p 必须在 [0, 1/4] 内，实际 {p}")
        return value

    @field_validator("corr_values")
    @classmethod
    def _check_corr(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("至少需要一个关联参数")
        for c in value:
            if not -1.0 <= c <= 1.0:
                raise ValueError(f"关联参数必须在 [−1, 1] 内，实际 {c}")
        return value

    @model_validator(mode="after")
    def _check_model_range(self) -> Self:
        if self.model == "cP" and min(self.corr_values) < 0.0:
            raise ValueError("cP 模型的关联参数 m 必须在 [0, 1] 内")
        return self


@register_command
class DistillCommand(BaseCommand):
    """D_u 保真度扫描"""

    name = "distill"
    description = "在关联误差下扫描两轮蒸馏协议 D_u 的保真度，附未蒸馏基线 F_n"
    config_model = DistillConfig

    def default_config(self, settings: Settings) -> Dict[str, Any]:
        return settings.distill.model_dump()

    def execute(self, config: DistillConfig, context: RunContext) -> Dict[str, Any]:
        convention = resolve_convention(config.convention)
        checkpoint = None
        if config.check_invariants:
            checkpoint = convention_checkpoint(convention)
            if not checkpoint["passed"]:
                return {
                    "success": False,
                    "result": {"checkpoint": checkpoint},
                    "error": f"电路约定 {convention} 未通过检查点: {checkpoint['checks']}",
                }

        df = fidelity_sweep(
            config.model, config.p_values, config.corr_values,
            convention=convention, on_done=context.progress(self.name),
        )
        degenerate = int((df["error"] != "").sum())
        if degenerate and context.state is not None:
            context.state.log_warning(f"{degenerate} 行后选择退化，F_u 记为 NaN")

        path = resolve_output(context, self.name, context.export_format)
        metadata = build_metadata(self.name, config.model_dump(mode="json"), convention=convention)
        export_info = export_table(df, path, metadata, context.export_format)
        if context.state is not None:
            context.state.add_output(export_info["file_path"])

        best = df["F_u"].max()
        print(f"✓ 蒸馏扫描 {len(df)} 行（约定 {convention}），最大 F_u = {best:.6f}")
        return {
            "success": True,
            "result": {
                "convention": convention,
                "rows": len(df),
                "degenerate_rows": degenerate,
                "max_F_u": None if np.isnan(best) else float(best),
                "checkpoint": checkpoint,
                "export_info": export_info,
                "table": df,
            },
            "error": None,
        }
