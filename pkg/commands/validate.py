"""
随机游走验证命令：validate
"""

from typing import Any, Callable, Dict, List, Literal, Tuple

import numpy as np
from pydantic import Field

from commands import resolve_output
from core.channel1q import NormalParams1Q, ptm, random_walk_ptm
from core.channel2q import IsotropicNormalParams, NormalParams2Q, correlated_normal_ptm, normal_ptm2, random_walk_ptm2
from core.commands import BaseCommand, RunConfig, RunContext, register_command
from core.config import Settings
from core.export import build_metadata, write_json
from core.montecarlo import compare_estimate
from core.report import save_report, validation_markdown

Check = Tuple[str, int, Dict[str, Any], Callable[[], np.ndarray], Callable[[int, int, int], Any]]


def _one_qubit(name: str, params: NormalParams1Q) -> Check:
    return (
        name, 1, params.to_dict(),
        lambda: ptm(params).R,
        lambda steps, samples, seed: random_walk_ptm(params, steps, samples, seed),
    )


def _two_qubit(name: str, params: NormalParams2Q, exact: Callable[[], np.ndarray]) -> Check:
    return (
        name, 2, params.to_dict(),
        exact,
        lambda steps, samples, seed: random_walk_ptm2(params, steps, samples, seed),
    )


def one_qubit_suite() -> List[Check]:
    """单比特默认检查：三组参数，外加 A = 0 的两个精确情形"""
    coupled = NormalParams1Q(
        A=[[0.4, 0.1, 0.0], [0.1, 0.3, 0.05], [0.0, 0.05, 0.2]],
        b=[0.2, -0.1, 0.3],
    )
    return [
        _one_qubit("1q_zero", NormalParams1Q(A=np.zeros((3, 3)))),
        _one_qubit("1q_pure_drift", NormalParams1Q(A=np.zeros((3, 3)), b=[0.3, 0.0, 0.4])),
        _one_qubit("1q_pauli_diag", NormalParams1Q.diagonal([0.3, 0.2, 0.1])),
        _one_qubit("1q_coupled_drift", coupled),
        _one_qubit("1q_axial_drift", NormalParams1Q.diagonal([0.2, 0.2, 0.5], [0.0, 0.0, 0.5])),
    ]


def two_qubit_suite() -> List[Check]:
    """双比特默认检查：关联各向同性误差（完全关联、反关联）与一般块结构"""
    checks = []
    for name, iso in (
        ("2q_isotropic_rho1", IsotropicNormalParams(a1=0.4, a2=0.3, rho=1.0)),
        ("2q_isotropic_rho-0.5", IsotropicNormalParams(a1=0.4, a2=0.3, rho=-0.5)),
    ):
        checks.append(_two_qubit(name, iso.to_normal_params(), lambda iso=iso: correlated_normal_ptm(iso).T))
    general = NormalParams2Q.from_blocks(
        A1=np.diag([0.3, 0.2, 0.25]),
        A2=np.diag([0.2, 0.3, 0.15]),
        F=[[0.1, 0.0, 0.05], [0.0, 0.08, 0.0], [0.05, 0.0, 0.1]],
        b1=[0.1, 0.0, 0.2],
        b2=[0.0, -0.15, 0.1],
    )
    checks.append(_two_qubit("2q_general_blocks", general, lambda: normal_ptm2(general).T))
    return checks


class ValidateConfig(RunConfig):
    """validate 命令的运行配置"""
    suites: List[Literal["1q", "2q"]] = Field(default_factory=lambda: ["1q", "2q"], description="检查组")
    n_samples: int = Field(default=100_000, ge=1000, description="样本数")
    n_steps: int = Field(default=100, ge=50, description="游走步数")
    seed: int = Field(default=7, ge=0, description="根种子，第 i 项检查使用 seed + i")
    n_sigma: float = Field(default=3.0, gt=0.0, description="单元素 σ 倍数")
    family_wise: bool = Field(default=False, description="按矩阵元素数校正阈值")


@register_command
class ValidateCommand(BaseCommand):
    """闭式结果与随机游走估计的对照"""

    name = "validate"
    description = "以 SU(2) 与 SU(2)⊗SU(2) 上的随机游走估计逐元素验证闭式转移矩阵"
    config_model = ValidateConfig

    def default_config(self, settings: Settings) -> Dict[str, Any]:
        return settings.oracle.model_dump()

    def execute(self, config: ValidateConfig, context: RunContext) -> Dict[str, Any]:
        checks: List[Check] = []
        if "1q" in config.suites:
            checks += one_qubit_suite()
        if "2q" in config.suites:
            checks += two_qubit_suite()

        state = context.state
        logger = state.execution_logger if state else None
        entries = []
        for index, (name, n_qubits, params, exact_fn, estimate_fn) in enumerate(checks):
            step = state.add_step(name) if state else None
            exact = exact_fn()
            estimate = estimate_fn(config.n_steps, config.n_samples, config.seed + index)
            outcome = compare_estimate(estimate, exact, n_sigma=config.n_sigma, family_wise=config.family_wise)
            entry = {
                "name": name,
                "n_qubits": n_qubits,
                "params": params,
                "seed": config.seed + index,
                **outcome.model_dump(),
                "closed_form": exact.tolist(),
                "estimate": estimate.mean.tolist(),
                "stderr": estimate.stderr.tolist(),
            }
            entries.append(entry)
            mark = "✓" if outcome.passed else "❌"
            print(f"{mark} {name}: 最大偏差 {outcome.max_deviation:.3e}，最大 σ {outcome.max_sigma:.3e}")
            if logger:
                logger.log_check_result(name, outcome.model_dump())
            if state is not None:
                if state.realtime_logger:
                    state.realtime_logger.log_check(name, outcome.passed, outcome.worst_ratio)
                state.finish_step(step.step_id, outcome.model_dump(), None if outcome.passed else "超出允许偏差")

        passed = all(e["passed"] for e in entries)
        report = {"passed": passed, "config": config.model_dump(mode="json"), "checks": entries}

        path = resolve_output(context, self.name, "json")
        write_json(report, path, build_metadata(self.name, config.model_dump(mode="json"), seed=config.seed))
        files = {"json": str(path)}
        if context.report:
            files.update(save_report(validation_markdown(report), path, "随机游走验证报告"))
        if state is not None:
            for file_path in files.values():
                state.add_output(file_path)

        failed = [e["name"] for e in entries if not e["passed"]]
        return {
            "success": passed,
            "result": {"passed": passed, "checks": len(entries), "failed": failed, "files": files},
            "error": None if passed else f"检查未通过: {', '.join(failed)}",
        }
