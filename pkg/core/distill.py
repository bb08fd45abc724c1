"""
纠缠蒸馏模块
基本协议 D（双边 CNOT + 后选择）与加 Hadamard 后处理的两轮协议 D_u 的精确密度矩阵模拟

比特顺序：[1.1, 1.2, 2.1, 2.2] 对应下标 0..3；1.x 与 2.x 是两个 Bell 对，
x.2 为经信道传输的比特。标准约定：Alice 1.1 → 2.1，Bob 1.2 → 2.2，测量 2.1、2.2。
镜像约定交换两对的角色。
"""

from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.channel1q import ChoiMatrix, PauliTransferMatrix1Q, choi_from_ptm, choi_from_transfer
from core.channel2q import (
    CorrelatedPauliParams,
    IsotropicNormalParams,
    PauliTransferMatrix2Q,
    correlated_normal_ptm,
    correlated_pauli_ptm,
)
from core.errors import ChannelArityError, DegenerateOutcomeError, InvalidParameterError
from core.parallel import TaskError, run_ordered

MAX_QUBITS = 8
SUCCESS_FLOOR = 1e-14
CONVENTIONS = ("standard", "mirrored")

Channel = Union[ChoiMatrix, PauliTransferMatrix1Q, PauliTransferMatrix2Q]

PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


class DensityMatrix(BaseModel):
    """n 比特密度矩阵（n ≤ 8），厄米、单位迹、半正定"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rho: np.ndarray

    @field_validator("rho", mode="before")
    @classmethod
    def _check_rho(cls, value):
        rho = np.array(value, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"rho 必须是方阵，实际形状 {rho.shape}")
        dim = rho.shape[0]
        n = dim.bit_length() - 1
        if dim != 2 ** n or n < 1 or n > MAX_QUBITS:
            raise ValueError(f"rho 的维度 {dim} 必须是 2ⁿ（1 ≤ n ≤ {MAX_QUBITS}）")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("rho 不是厄米矩阵")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError(f"rho 的迹为 {np.trace(rho).real:.15f}，应为 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -1e-10:
            raise ValueError("rho 不是半正定矩阵")
        rho.flags.writeable = False
        return rho

    @property
    def n_qubits(self) -> int:
        return self.rho.shape[0].bit_length() - 1

    def fidelity(self, target: np.ndarray = PHI_PLUS) -> float:
        """⟨ψ|ρ|ψ⟩"""
        return float(np.real(target.conj() @ self.rho @ target))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(rho=np.kron(self.rho, other.rho))


class DistillOutcome(BaseModel):
    """后选择并归一化后的 Bell 对、累计成功概率与保真度"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    state: DensityMatrix
    success_prob: float = Field(ge=0.0, le=1.0 + 1e-12)
    fidelity: float = Field(ge=-1e-12, le=1.0 + 1e-12)
    convention: str = "standard"


def bell_pair() -> DensityMatrix:
    return DensityMatrix(rho=np.outer(PHI_PLUS, PHI_PLUS.conj()))


def as_choi(channel: Channel) -> ChoiMatrix:
    """统一转换为 Choi 矩阵"""
    if isinstance(channel, ChoiMatrix):
        return channel
    if isinstance(channel, PauliTransferMatrix1Q):
        return choi_from_ptm(channel)
    if isinstance(channel, PauliTransferMatrix2Q):
        return choi_from_transfer(channel.T)
    raise InvalidParameterError("channel", f"不支持的信道类型 {type(channel).__name__}")


def _check_targets(n_qubits: int, targets: Sequence[int], arity: int) -> List[int]:
    targets = [int(t) for t in targets]
    if len(targets) != arity:
        raise ChannelArityError(f"信道作用于 {arity} 个比特，但给出了 {len(targets)} 个目标 {targets}")
    if len(set(targets)) != len(targets):
        raise ChannelArityError(f"目标比特重复: {targets}")
    if any(t < 0 or t >= n_qubits for t in targets):
        raise ChannelArityError(f"目标比特 {targets} 超出范围 [0, {n_qubits})")
    return targets


def _to_front(rho: np.ndarray, n: int, targets: List[int]) -> tuple:
    rest = [q for q in range(n) if q not in targets]
    order = targets + rest
    perm = order + [n + q for q in order]
    d_t, d_r = 2 ** len(targets), 2 ** len(rest)
    return rho.reshape([2] * (2 * n)).transpose(perm).reshape(d_t, d_r, d_t, d_r), perm


def _from_front(block: np.ndarray, n: int, perm: List[int]) -> np.ndarray:
    inverse = np.argsort(perm)
    return block.reshape([2] * (2 * n)).transpose(inverse).reshape(2 ** n, 2 ** n)


def apply_channel(state: DensityMatrix, channel: Channel, targets: Sequence[int]) -> DensityMatrix:
    """
    在目标比特上作用信道，其余比特不变

    Args:
        state: 输入态
        channel: Choi 矩阵或转移矩阵
        targets: 目标比特（顺序对应信道的输入因子）

    Returns:
        新的 DensityMatrix
    """
    choi = as_choi(channel)
    arity = choi.d.bit_length() - 1
    n = state.n_qubits
    targets = _check_targets(n, targets, arity)
    block, perm = _to_front(state.rho, n, targets)
    out = np.einsum("irjs,ikjl->krls", block, choi.tensor())
    return DensityMatrix(rho=_from_front(out, n, perm))


def apply_unitary(state: DensityMatrix, U: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    """在目标比特上作用 U ρ U†"""
    n = state.n_qubits
    targets = _check_targets(n, targets, int(U.shape[0]).bit_length() - 1)
    block, perm = _to_front(state.rho, n, targets)
    out = np.einsum("ai,irjs,bj->arbs", U, block, U.conj())
    return DensityMatrix(rho=_from_front(out, n, perm))


def cnot(control: int, target: int, n_qubits: int) -> np.ndarray:
    """n 比特上的 CNOT 矩阵（比特 0 为最高位）"""
    dim = 2 ** n_qubits
    U = np.zeros((dim, dim), dtype=complex)
    for basis in range(dim):
        flipped = basis
        if (basis >> (n_qubits - 1 - control)) & 1:
            flipped ^= 1 << (n_qubits - 1 - target)
        U[flipped, basis] = 1.0
    return U


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


BILATERAL_CNOT = {
    "standard": cnot(0, 2, 4) @ cnot(1, 3, 4),
    "mirrored": cnot(2, 0, 4) @ cnot(3, 1, 4),
}

# 后选择投影并丢弃测量比特：K_b 把 4 比特态映到保留的 2 比特
_KEEP = np.eye(4, dtype=complex)
POST_SELECT = {
    "standard": [np.kron(_KEEP, _ket(bits)[:, None]) for bits in ("00", "11")],
    "mirrored": [np.kron(_ket(bits)[:, None], _KEEP) for bits in ("00", "11")],
}


def _check_convention(convention: str) -> str:
    if convention not in CONVENTIONS:
        raise InvalidParameterError("convention", f"必须是 standard 或 mirrored，实际 {convention}")
    return convention


def distill_step(state: DensityMatrix, convention: str = "standard", stage: str = "D") -> DistillOutcome:
    """
    对两个 Bell 对的 4 比特态执行双边 CNOT、σz 测量与一致结果后选择

    Args:
        state: 4 比特态
        convention: standard 或 mirrored
        stage: 出错时报告的阶段名

    Returns:
        DistillOutcome（success_prob 为本步的条件成功概率）

    Raises:
        DegenerateOutcomeError: 成功概率低于 1e-14
    """
    convention = _check_convention(convention)
    if state.n_qubits != 4:
        raise ChannelArityError(f"蒸馏步骤需要 4 比特态，实际 {state.n_qubits}")
    U = BILATERAL_CNOT[convention]
    rotated = U @ state.rho @ U.conj().T
    kept = sum(K.conj().T @ rotated @ K for K in POST_SELECT[convention])
    success = float(np.real(np.trace(kept)))
    if success < SUCCESS_FLOOR:
        raise DegenerateOutcomeError(success, stage)
    kept = kept / success
    kept = 0.5 * (kept + kept.conj().T)
    pair = DensityMatrix(rho=kept)
    return DistillOutcome(
        state=pair, success_prob=min(success, 1.0), fidelity=pair.fidelity(), convention=convention
    )


def transmit(channel: Channel) -> DensityMatrix:
    """制备 |Φ⁺⟩⊗|Φ⁺⟩，信道联合作用于传输比特 1.2、2.2"""
    initial = bell_pair().tensor(bell_pair())
    return apply_channel(initial, channel, [1, 3])


def basic_distill(channel: Channel, convention: str = "standard") -> DistillOutcome:
    """
    基本蒸馏协议 D

    Args:
        channel: 作用于两个传输比特的双比特误差信道
        convention: 电路约定

    Returns:
        DistillOutcome
    """
    return distill_step(transmit(channel), convention, stage="D")


def full_distill(channel1: Channel, channel2: Optional[Channel] = None, convention: str = "standard") -> DistillOutcome:
    """
    两轮协议 D_u = Λ_post ∘ D^⊗2

    两次 D 独立运行（信道可不同），对四个剩余比特作用 Hadamard，
    再执行一次 D 式的 CNOT + 测量 + 后选择。成功概率为三次后选择全部成功的联合概率。

    Args:
        channel1: 第一次 D 的误差信道
        channel2: 第二次 D 的误差信道，默认与 channel1 相同
        convention: 电路约定

    Returns:
        DistillOutcome
    """
    first = basic_distill(channel1, convention)
    second = basic_distill(channel1 if channel2 is None else channel2, convention)
    combined = first.state.tensor(second.state)
    rotated = apply_unitary(combined, np.kron(np.kron(HADAMARD, HADAMARD), np.kron(HADAMARD, HADAMARD)), [0, 1, 2, 3])
    final = distill_step(rotated, convention, stage="D_u")
    return DistillOutcome(
        state=final.state,
        success_prob=min(first.success_prob * second.success_prob * final.success_prob, 1.0),
        fidelity=final.fidelity,
        convention=convention,
    )


def no_distill_fidelity(channel: Channel) -> float:
    """不蒸馏时传输 Bell 对的保真度 F_n = (1 + tr R)/4（R 为单比特边缘信道）"""
    if isinstance(channel, PauliTransferMatrix2Q):
        return float((1.0 + np.trace(channel.R1)) / 4.0)
    if isinstance(channel, PauliTransferMatrix1Q):
        return float((1.0 + np.trace(channel.R)) / 4.0)
    choi = as_choi(channel)
    if choi.d == 2:
        reduced = apply_channel(bell_pair(), choi, [1]).rho
    else:
        # 丢弃第二个 Bell 对
        reduced = np.einsum("iaja->ij", transmit(choi).rho.reshape(4, 4, 4, 4))
    return float(np.real(PHI_PLUS.conj() @ reduced @ PHI_PLUS))


def convention_checkpoint(convention: str) -> dict:
    """
    电路约定的发布检查点

    - Λ_cP(1)，p = q = 1/4：F_u = 1/2，末态 diag(½, 0, 0, ½)
    - 独立各向同性误差：1 − 8p² − F_u 与 p³ 同阶

    Returns:
        {"convention", "passed", "checks": {...}}
    """
    convention = _check_convention(convention)
    checks = {}
    outcome = full_distill(correlated_pauli_ptm(CorrelatedPauliParams(p=0.25, q=0.25, m=1.0)), convention=convention)
    expected = np.diag([0.5, 0.0, 0.0, 0.5])
    checks["half_fidelity"] = bool(
        abs(outcome.fidelity - 0.5) < 1e-10 and np.max(np.abs(outcome.state.rho - expected)) < 1e-10
    )
    ratios = []
    for p in (0.005, 0.01, 0.02):
        f_u = full_distill(correlated_pauli_ptm(CorrelatedPauliParams(p=p, q=p, m=0.0)), convention=convention).fidelity
        ratios.append((1.0 - 8.0 * p * p - f_u) / p ** 3)
    checks["cubic_residual"] = bool(min(ratios) > 0.0 and max(ratios) / min(ratios) < 1.15)
    return {"convention": convention, "passed": all(checks.values()), "checks": checks, "residual_ratios": ratios}


def resolve_convention(setting: str) -> str:
    """auto 时先试 standard，检查点不通过再试 mirrored"""
    if setting != "auto":
        return _check_convention(setting)
    for convention in CONVENTIONS:
        if convention_checkpoint(convention)["passed"]:
            return convention
    raise InvalidParameterError("convention", "两种电路约定均未通过检查点")


def build_channel(model: str, p: float, corr: float, q: Optional[float] = None) -> PauliTransferMatrix2Q:
    """
    构造扫描用的双比特误差信道

    Args:
        model: "cP"（关联 Pauli，corr = m）或 "c2"（关联正规，corr = ρ）
        p: 第一个比特的各向同性误差概率
        corr: 关联参数
        q: 第二个比特的误差概率，默认等于 p
    """
    q = p if q is None else q
    if model == "cP":
        return correlated_pauli_ptm(CorrelatedPauliParams(p=p, q=q, m=corr))
    if model == "c2":
        return correlated_normal_ptm(IsotropicNormalParams.from_pauli(p, q, corr))
    raise InvalidParameterError("model", f"必须是 cP 或 c2，实际 {model}")


def _sweep_row(args) -> dict:
    model, p, corr, convention = args
    channel = build_channel(model, p, corr)
    row = {"p": p, "corr": corr, "F_n": no_distill_fidelity(channel)}
    outcome = full_distill(channel, convention=convention)
    row.update({"F_u": outcome.fidelity, "success_prob": outcome.success_prob})
    return row


def fidelity_sweep(
    model: str,
    p_values: Union[float, Sequence[float]],
    corr_values: Union[float, Sequence[float]],
    convention: str = "standard",
    max_workers: Optional[int] = None,
    on_done=None,
) -> pd.DataFrame:
    """
    D_u 保真度扫描，按 (corr, p) 的网格顺序输出

    Args:
        model: cP 或 c2
        p_values: 误差概率网格（或单个值）
        corr_values: 关联参数网格（或单个值）
        convention: 电路约定
        max_workers: 线程数
        on_done: 进度回调

    Returns:
        DataFrame，列 model, p, corr, F_n, F_u, success_prob, error；
        后选择退化的行 F_u 为 NaN 并记录错误
    """
    if model not in ("cP", "c2"):
        raise InvalidParameterError("model", f"必须是 cP 或 c2，实际 {model}")
    ps = [float(p_values)] if np.isscalar(p_values) else [float(p) for p in p_values]
    corrs = [float(corr_values)] if np.isscalar(corr_values) else [float(c) for c in corr_values]
    tasks = [(model, p, c, convention) for c in corrs for p in ps]
    results = run_ordered(_sweep_row, tasks, max_workers=max_workers, on_done=on_done)

    rows = []
    for (_, p, c, _), result in zip(tasks, results):
        if isinstance(result, TaskError):
            rows.append({"model": model, "p": p, "corr": c, "F_n": np.nan, "F_u": np.nan,
                         "success_prob": np.nan, "error": f"{result.error_type}: {result.error}"})
        else:
            rows.append({"model": model, **result, "error": ""})
    return pd.DataFrame(rows, columns=["model", "p", "corr", "F_n", "F_u", "success_prob", "error"])
