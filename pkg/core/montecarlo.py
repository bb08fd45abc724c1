"""
随机游走验证模块
在切空间中按 N(b/n, A/n) 抽取 n 步，累乘 exp_map 得到群元，估计转移矩阵的期望
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import norm

from core.config import get_settings
from core.errors import InvalidParameterError
from core.parallel import run_ordered
from core.su2 import PAULIS, covariance_factor, exp_map_batch, spawn_rngs

MIN_STEPS = 50
MIN_SAMPLES = 1000

_SIGMAS = np.stack(PAULIS[1:])
_PAULI4 = np.stack(PAULIS)


class RandomWalkEstimate(BaseModel):
    """
    随机游走估计结果

    单比特：3×3 Bloch 块；双比特：16×16 字典序完整转移矩阵
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    stderr: np.ndarray
    n_samples: int
    n_steps: int
    seed: int
    n_qubits: int

    def max_stderr(self) -> float:
        return float(np.max(self.stderr))


class CheckOutcome(BaseModel):
    """闭式结果与随机游走估计的逐元素比较"""
    passed: bool
    z: float
    n_entries: int
    max_deviation: float
    max_sigma: float
    worst_entry: Tuple[int, int]
    worst_ratio: float


def _transfer_batch(U: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """T_ab = ½ Re tr(P_a U P_b U†)，U 形状 (N, 2, 2)"""
    conjugated = np.einsum("nij,bjk,nlk->nbil", U, basis, U.conj())
    return 0.5 * np.einsum("aij,nbji->nab", basis, conjugated).real


def _walk_chunk(args) -> Tuple[np.ndarray, np.ndarray]:
    rng, size, factor, drift, n_steps, n_qubits = args
    dim = drift.size
    U1 = np.broadcast_to(np.eye(2, dtype=complex), (size, 2, 2)).copy()
    U2 = U1.copy() if n_qubits == 2 else None
    for _ in range(n_steps):
        steps = drift + rng.standard_normal((size, dim)) @ factor.T
        U1 = exp_map_batch(steps[:, :3]) @ U1
        if U2 is not None:
            U2 = exp_map_batch(steps[:, 3:]) @ U2

    if n_qubits == 1:
        T = _transfer_batch(U1, _SIGMAS)
        return T.sum(axis=0), (T * T).sum(axis=0)

    T1 = _transfer_batch(U1, _PAULI4)
    T2 = _transfer_batch(U2, _PAULI4)
    # Σ_n kron(T1, T2)，不展开 16×16 的逐样本矩阵
    total = np.einsum("nij,nkl->ikjl", T1, T2).reshape(16, 16)
    squares = np.einsum("nij,nkl->ikjl", T1 * T1, T2 * T2).reshape(16, 16)
    return total, squares


def random_walk_estimate(
    A,
    b,
    n_qubits: int,
    n_steps: int,
    n_samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> RandomWalkEstimate:
    """
    随机游走估计转移矩阵

    Args:
        A: 3×3（单比特）或 6×6（双比特）扩散矩阵
        b: 漂移向量
        n_qubits: 1 或 2
        n_steps: 步数（≥ 50）
        n_samples: 样本数（≥ 1000）
        seed: 根种子；各分块使用 SeedSequence 派生的独立 Philox 流
        chunk_size: 每块样本数，默认取配置
        max_workers: 线程数

    Returns:
        RandomWalkEstimate，按分块序号合并，与线程数无关
    """
    if n_qubits not in (1, 2):
        raise InvalidParameterError("n_qubits", f"仅支持 1 或 2，实际 {n_qubits}")
    if n_steps < MIN_STEPS:
        raise InvalidParameterError("n_steps", f"步数至少为 {MIN_STEPS}，实际 {n_steps}")
    if n_samples < MIN_SAMPLES:
        raise InvalidParameterError("n_samples", f"样本数至少为 {MIN_SAMPLES}，实际 {n_samples}")

    dim = 3 * n_qubits
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape != (dim, dim) or b.size != dim:
        raise InvalidParameterError("A", f"需要 {dim}×{dim} 的 A 与 {dim} 维 b")

    chunk = int(chunk_size or get_settings().montecarlo.chunk_size)
    n_chunks = math.ceil(n_samples / chunk)
    sizes = [chunk] * (n_chunks - 1) + [n_samples - chunk * (n_chunks - 1)]
    rngs = spawn_rngs(seed, n_chunks)
    factor = covariance_factor(A / n_steps)
    drift = b / n_steps

    tasks = [(rng, size, factor, drift, n_steps, n_qubits) for rng, size in zip(rngs, sizes)]
    results: List[Tuple[np.ndarray, np.ndarray]] = run_ordered(
        _walk_chunk, tasks, max_workers=max_workers, capture_errors=False
    )

    total = sum(r[0] for r in results)
    squares = sum(r[1] for r in results)
    mean = total / n_samples
    variance = np.clip((squares - n_samples * mean * mean) / (n_samples - 1), 0.0, None)
    stderr = np.sqrt(variance / n_samples)
    return RandomWalkEstimate(
        mean=mean, stderr=stderr, n_samples=n_samples, n_steps=n_steps, seed=seed, n_qubits=n_qubits
    )


def family_wise_z(n_sigma: float, n_entries: int) -> float:
    """
    多元素比较的阈值：使整体误报率等于单次 n_sigma 检验的单侧尾概率

    n_sigma = 3 时 z = Φ⁻¹(1 − 0.00135 / N)
    """
    tail = norm.sf(n_sigma)
    return float(norm.isf(tail / max(1, n_entries)))


def compare_estimate(
    estimate: RandomWalkEstimate,
    exact,
    n_sigma: float = 3.0,
    family_wise: bool = False,
    abs_tol: float = 1e-12,
) -> CheckOutcome:
    """
    逐元素比较：|估计 − 闭式| ≤ z·σ + abs_tol 视为通过

    Args:
        estimate: 随机游走估计
        exact: 闭式矩阵（与 estimate.mean 同形状）
        n_sigma: 单元素 σ 倍数
        family_wise: 是否按元素数校正阈值
        abs_tol: 绝对容差（σ = 0 的元素须在此范围内一致）

    Returns:
        CheckOutcome
    """
    exact = np.asarray(exact, dtype=float)
    if exact.shape != estimate.mean.shape:
        raise InvalidParameterError("exact", f"形状 {exact.shape} 与估计 {estimate.mean.shape} 不一致")
    n_entries = exact.size
    z = family_wise_z(n_sigma, n_entries) if family_wise else float(n_sigma)
    deviation = np.abs(estimate.mean - exact)
    allowed = z * estimate.stderr + abs_tol
    ratio = deviation / allowed
    worst = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return CheckOutcome(
        passed=bool(np.all(deviation <= allowed)),
        z=z,
        n_entries=n_entries,
        max_deviation=float(deviation.max()),
        max_sigma=float(estimate.stderr.max()),
        worst_entry=(int(worst[0]), int(worst[1])),
        worst_ratio=float(ratio[worst]),
    )
