"""
SU(2) 表示论模块
生成元、Wigner D 矩阵（s = 1/2, 1）、指数映射、切空间高斯步长采样与 Haar 采样

约定：
- L⃗^(1/2) = σ⃗/2
- 自旋 1 的基按 m = (1, 0, −1) 排列，Lz = diag(1, 0, −1)
- D(g) = exp(−iα Lz)·exp(−iβ Ly)·exp(−iγ Lz)
- 随机数：Philox 计数器生成器，子流由 SeedSequence.spawn 派生
"""

from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import InvalidParameterError, UnsupportedSpinError
from core.linalg import Matrix, expm

SpinLabel = Union[int, float, str, Fraction]

TWO_PI = 2.0 * np.pi
PSD_CLIP_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_SPIN_ONE = (
    _SQRT_HALF * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex),
    _SQRT_HALF * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex),
    np.diag([1.0, 0.0, -1.0]).astype(complex),
)


def twice_spin(s: SpinLabel) -> int:
    """
    把自旋标签转换为 2s

    Args:
        s: 0、1/2（可写作 0.5、"1/2"、Fraction(1, 2)）或 1

    Returns:
        2s ∈ {0, 1, 2}
    """
    try:
        value = Fraction(s) if isinstance(s, str) else Fraction(s).limit_denominator(8)
    except (TypeError, ValueError, ZeroDivisionError):
        raise UnsupportedSpinError(f"无法识别的自旋标签: {s!r}")
    doubled = value * 2
    if doubled.denominator != 1 or int(doubled) not in (0, 1, 2):
        raise UnsupportedSpinError(f"仅支持 s ∈ {{0, 1/2, 1}}，实际 {s!r}")
    return int(doubled)


def generators(s: SpinLabel) -> List[Matrix]:
    """
    SU(2) 生成元 (Lx, Ly, Lz)，满足 [Lx, Ly] = i Lz

    Args:
        s: 自旋标签，1/2 或 1（0 返回 1×1 零矩阵）

    Returns:
        三个厄米矩阵
    """
    two_s = twice_spin(s)
    if two_s == 0:
        return [np.zeros((1, 1), dtype=complex) for _ in range(3)]
    if two_s == 1:
        return [0.5 * SIGMA_X, 0.5 * SIGMA_Y, 0.5 * SIGMA_Z]
    return [L.copy() for L in _SPIN_ONE]


class EulerAngles(BaseModel):
    """
    ZYZ 欧拉角

    alpha、gamma 归一化到 [0, 2π)，每绕过一整圈翻转 sheet；
    sheet 区分 SU(2) 双覆盖的两叶，D^(1/2) 乘以 (−1)^sheet。
    """
    model_config = ConfigDict(frozen=True)

    alpha: float = 0.0
    beta: float = Field(default=0.0, ge=0.0, le=np.pi)
    gamma: float = 0.0
    sheet: int = Field(default=0, ge=0, le=1)

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        flips = 0
        for key in ("alpha", "gamma"):
            value = float(data.get(key, 0.0))
            if not np.isfinite(value):
                raise ValueError(f"{key} 必须是有限值")
            turns = int(np.floor(value / TWO_PI))
            reduced = value - turns * TWO_PI
            if reduced >= TWO_PI:
                reduced -= TWO_PI
                turns += 1
            data[key] = reduced
            flips += turns
        beta = float(data.get("beta", 0.0))
        if -1e-12 < beta < 0.0:
            data["beta"] = 0.0
        elif np.pi < beta < np.pi + 1e-12:
            data["beta"] = float(np.pi)
        data["sheet"] = (int(data.get("sheet", 0)) + flips) % 2
        return data


class TangentVector(BaseModel):
    """切空间向量 n⃗，g = exp(−i n⃗·L⃗)"""
    model_config = ConfigDict(frozen=True)

    n: tuple

    @field_validator("n", mode="before")
    @classmethod
    def _check(cls, value):
        arr = np.asarray(value, dtype=float).reshape(-1)
        if arr.size != 3 or not np.all(np.isfinite(arr)):
            raise ValueError("n 必须是有限的三维实向量")
        return tuple(float(x) for x in arr)

    def as_array(self) -> np.ndarray:
        return np.array(self.n)


def _small_d(two_s: int, beta: float) -> Matrix:
    c, s = np.cos(beta), np.sin(beta)
    if two_s == 1:
        ch, sh = np.cos(beta / 2), np.sin(beta / 2)
        return np.array([[ch, -sh], [sh, ch]], dtype=complex)
    return np.array([
        [(1 + c) / 2, -s * _SQRT_HALF, (1 - c) / 2],
        [s * _SQRT_HALF, c, -s * _SQRT_HALF],
        [(1 - c) / 2, s * _SQRT_HALF, (1 + c) / 2],
    ], dtype=complex)


def wigner_d(s: SpinLabel, angles: EulerAngles) -> Matrix:
    """
    Wigner D 矩阵 D^(s)(α, β, γ)

    Args:
        s: 自旋标签
        angles: 欧拉角

    Returns:
        (2s+1)×(2s+1) 酉矩阵
    """
    two_s = twice_spin(s)
    if two_s == 0:
        return np.ones((1, 1), dtype=complex)
    m = np.arange(two_s, -two_s - 1, -2) / 2.0
    left = np.exp(-1j * angles.alpha * m)
    right = np.exp(-1j * angles.gamma * m)
    D = left[:, None] * _small_d(two_s, angles.beta) * right[None, :]
    if two_s == 1 and angles.sheet:
        D = -D
    return D


def exp_map(n: Union[TangentVector, Sequence[float]], s: SpinLabel = "1/2") -> Matrix:
    """
    指数映射 exp(−i n⃗·L⃗^(s))

    Args:
        n: 切空间向量
        s: 自旋标签

    Returns:
        酉矩阵；s = 1/2 时使用闭式
    """
    vec = n.as_array() if isinstance(n, TangentVector) else TangentVector(n=n).as_array()
    two_s = twice_spin(s)
    if two_s == 0:
        return np.ones((1, 1), dtype=complex)
    if two_s == 1:
        return exp_map_batch(vec[None, :])[0]
    Lx, Ly, Lz = generators(1)
    return expm(-1j * (vec[0] * Lx + vec[1] * Ly + vec[2] * Lz))


def exp_map_batch(ns: np.ndarray) -> np.ndarray:
    """
    批量 s = 1/2 指数映射：cos(r/2)·1 − i·sin(r/2)/r·(n⃗·σ⃗)

    Args:
        ns: (N, 3) 切空间向量

    Returns:
        (N, 2, 2) 酉矩阵
    """
    ns = np.asarray(ns, dtype=float)
    r = np.linalg.norm(ns, axis=1)
    half = 0.5 * r
    # sin(r/2)/r，r → 0 时取极限 1/2
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(r > 1e-8, np.sin(half) / np.where(r > 1e-8, r, 1.0), 0.5 - r * r / 48.0)
    nx, ny, nz = ns[:, 0], ns[:, 1], ns[:, 2]
    U = np.empty((ns.shape[0], 2, 2), dtype=complex)
    c = np.cos(half)
    U[:, 0, 0] = c - 1j * factor * nz
    U[:, 1, 1] = c + 1j * factor * nz
    U[:, 0, 1] = -factor * (1j * nx + ny)
    U[:, 1, 0] = -factor * (1j * nx - ny)
    return U


def covariance_factor(C, tol: float = PSD_CLIP_TOL) -> Matrix:
    """
    协方差矩阵的平方根因子 F（F·Fᵀ = C），负特征值在容差内截断为 0

    Args:
        C: 实对称半正定矩阵
        tol: 允许的最小特征值为 −tol

    Returns:
        实矩阵 F
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InvalidParameterError("C", f"协方差必须是方阵，实际形状 {C.shape}")
    if np.max(np.abs(C - C.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(C), initial=0.0)):
        raise InvalidParameterError("C", "协方差矩阵不对称")
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    if w.size and w.min() < -tol:
        raise InvalidParameterError("C", f"协方差矩阵不是半正定的（最小特征值 {w.min():.3e}）")
    return V * np.sqrt(np.clip(w, 0.0, None))


def sample_steps(C, mean, rng: np.random.Generator, size: int) -> np.ndarray:
    """
    批量抽取高斯步长

    Args:
        C: d×d 协方差
        mean: d 维均值
        rng: 随机数生成器
        size: 样本数

    Returns:
        (size, d) 数组
    """
    mean = np.asarray(mean, dtype=float).reshape(-1)
    F = covariance_factor(C)
    if F.shape[0] != mean.size:
        raise InvalidParameterError("mean", f"均值维度 {mean.size} 与协方差维度 {F.shape[0]} 不一致")
    z = rng.standard_normal((size, mean.size))
    return mean + z @ F.T


def sample_step(C, mean, rng: np.random.Generator) -> TangentVector:
    """抽取单个三维切空间步长"""
    return TangentVector(n=sample_steps(C, mean, rng, 1)[0])


def haar_sample(rng: np.random.Generator) -> EulerAngles:
    """
    按归一化 Haar 测度抽样 SU(2)

    密度 ∝ sin β dβ dα dγ；sheet 均匀抽取。
    """
    alpha, gamma = rng.uniform(0.0, TWO_PI, size=2)
    beta = float(np.arccos(np.clip(1.0 - 2.0 * rng.uniform(), -1.0, 1.0)))
    sheet = int(rng.integers(0, 2))
    return EulerAngles(alpha=float(alpha), beta=beta, gamma=float(gamma), sheet=sheet)


def make_rng(seed: Optional[Union[int, np.random.SeedSequence]] = None) -> np.random.Generator:
    """Philox 生成器；同一种子给出相同的流"""
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: Union[int, np.random.SeedSequence], n: int) -> List[np.random.Generator]:
    """
    派生 n 个相互独立的 Philox 子流

    Args:
        seed: 根种子
        n: 子流数量

    Returns:
        按序号排列的生成器列表，与工作线程数无关
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in root.spawn(n)]
