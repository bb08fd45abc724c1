"""
稠密矩阵内核
矩阵指数、实对数分支枚举、小型非厄米矩阵的特征分解、Kronecker 积
"""

from typing import List, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from core.errors import DimensionError, ExceptionalPointError, NumericError

Matrix = np.ndarray

DEFECT_THRESHOLD = 1e8
PAIR_TOL = 1e-8
EIG_RESIDUAL_TOL = 1e-10
MAX_DIM = 256


def as_matrix(value, name: str = "M", square: bool = True) -> Matrix:
    """
    转换为二维复数/实数数组并校验

    Args:
        value: 类数组输入
        name: 出错时报告的名称
        square: 是否要求方阵

    Returns:
        numpy 二维数组（保持实数 dtype）
    """
    arr = np.asarray(value)
    if not np.issubdtype(arr.dtype, np.number):
        raise DimensionError(f"{name} 必须是数值矩阵")
    if arr.ndim != 2:
        raise DimensionError(f"{name} 必须是二维矩阵，实际维度 {arr.ndim}", {"shape": list(arr.shape)})
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} 必须是方阵，实际形状 {arr.shape}", {"shape": list(arr.shape)})
    if arr.shape[0] > MAX_DIM or arr.shape[1] > MAX_DIM:
        raise DimensionError(f"{name} 维度超过 {MAX_DIM}", {"shape": list(arr.shape)})
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} 含有 NaN 或 Inf")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    return arr


def cross_matrix(v) -> Matrix:
    """[v]ₓ，满足 [v]ₓ w = v × w"""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def axial_vector(K: Matrix) -> np.ndarray:
    """cross_matrix 的逆，取反对称部分"""
    K = np.asarray(K)
    return 0.5 * np.array([K[2, 1] - K[1, 2], K[0, 2] - K[2, 0], K[1, 0] - K[0, 1]])


def sym(M: Matrix) -> Matrix:
    return 0.5 * (M + M.T)


class EigenDecomposition(BaseModel):
    """特征分解结果，vectors 的列为右特征向量"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    vectors: np.ndarray
    condition: float = Field(ge=0.0)
    residual: float = 0.0


def expm(M) -> Matrix:
    """
    矩阵指数 e^M（缩放平方 + Padé 近似）

    Args:
        M: 方阵

    Returns:
        e^M，实输入返回实矩阵
    """
    M = as_matrix(M)
    return scipy.linalg.expm(M)


def kron(A, B) -> Matrix:
    """Kronecker 积，行优先分块：(A⊗B)[i·p+k, j·q+l] = A[i,j]·B[k,l]"""
    A = as_matrix(A, "A", square=False)
    B = as_matrix(B, "B", square=False)
    return np.kron(A, B)


def eig(M, residual_tol: float = EIG_RESIDUAL_TOL) -> EigenDecomposition:
    """
    非厄米矩阵特征分解

    特征值按 (实部, 虚部) 排序；特征向量列归一化。残差超过
    max(residual_tol·‖M‖, 1e-14) 时抛出 NumericError。

    Args:
        M: 方阵（维度 ≤ 16）
        residual_tol: 相对残差容差

    Returns:
        EigenDecomposition
    """
    M = as_matrix(M)
    if M.shape[0] > 16:
        raise DimensionError(f"eig 仅支持维度 ≤ 16，实际 {M.shape[0]}")
    try:
        values, vectors = np.linalg.eig(M)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"特征分解不收敛: {e}")

    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]

    norm = np.linalg.norm(M, 2)
    residual = float(np.max(np.linalg.norm(M @ vectors - vectors * values, axis=0))) if len(values) else 0.0
    tolerance = max(residual_tol * norm, 1e-14)
    if residual > tolerance:
        raise NumericError(f"特征分解残差 {residual:.3e} 超过容差 {tolerance:.3e}", residual, tolerance)

    with np.errstate(all="ignore"):
        condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition):
        condition = float("inf")
    return EigenDecomposition(values=values, vectors=vectors, condition=condition, residual=residual)


def real_log_branches(
    R,
    k_max: int,
    defect_threshold: float = DEFECT_THRESHOLD,
    pair_tol: float = PAIR_TOL,
) -> List[Tuple[int, Matrix]]:
    """
    3×3 实矩阵的全部实对数分支及其分支序号

    - 特征值全为正实数：仅主对数，序号 0
    - 一个正实特征值加一对共轭复特征值：ln(d₁) + 2πik，k ∈ [−k_max, k_max]
    - 其它情况（负实特征值、奇异矩阵）：返回空列表

    Args:
        R: 3×3 实矩阵
        k_max: 最大分支序号
        defect_threshold: 特征向量矩阵条件数阈值，超过视为奇异点
        pair_tol: 共轭配对的相对容差

    Returns:
        [(k, L_k)]，按 k 升序
    """
    R = as_matrix(R, "R")
    if R.shape != (3, 3):
        raise DimensionError(f"R 必须是 3×3，实际 {R.shape}")
    if np.iscomplexobj(R):
        if np.max(np.abs(R.imag)) > 1e-12:
            raise DimensionError("R 必须是实矩阵")
        R = R.real
    if k_max < 0:
        raise DimensionError(f"k_max 必须非负，实际 {k_max}")

    scale = max(float(np.linalg.norm(R, 2)), 1e-300)
    tol = pair_tol * scale
    decomposition = eig(R)
    values = decomposition.values

    if decomposition.condition > defect_threshold:
        raise ExceptionalPointError(decomposition.condition, values, defect_threshold)

    is_real = np.abs(values.imag) <= tol
    P = decomposition.vectors
    P_inv = np.linalg.inv(P)

    if np.all(is_real):
        real_values = values.real
        if np.any(real_values <= tol):
            return []
        L = (P * np.log(real_values)) @ P_inv
        return [(0, L.real)]

    if np.count_nonzero(is_real) != 1:
        return []
    real_index = int(np.flatnonzero(is_real)[0])
    pair = [i for i in range(3) if i != real_index]
    d1, d2 = values[pair[0]], values[pair[1]]
    if abs(d1 - np.conj(d2)) > tol:
        return []
    d3 = values[real_index].real
    if d3 <= tol:
        return []
    if d1.imag < 0:
        pair.reverse()
        d1 = values[pair[0]]

    branches: List[Tuple[int, Matrix]] = []
    base = np.log(d1)
    for k in range(-k_max, k_max + 1):
        logs = np.zeros(3, dtype=complex)
        logs[pair[0]] = base + 2j * np.pi * k
        logs[pair[1]] = np.conj(base + 2j * np.pi * k)
        logs[real_index] = np.log(d3)
        L = (P * logs) @ P_inv
        branches.append((k, L.real))
    return branches


def logm_real_branches(R, k_max: int, **kwargs) -> List[Matrix]:
    """实对数分支列表（不带序号），参数同 real_log_branches"""
    return [L for _, L in real_log_branches(R, k_max, **kwargs)]


def symmetric_psd(value, name: str, dim: int, sym_tol: float = 1e-12, psd_tol: float = 1e-10) -> Matrix:
    """
    校验实对称半正定矩阵，最小特征值在 [−psd_tol, 0) 内时截断为 0

    Args:
        value: 类数组输入
        name: 字段名
        dim: 期望维度
        sym_tol: 对称性容差（相对 max(1, ‖A‖)）
        psd_tol: 半正定容差

    Returns:
        只读的对称矩阵

    Raises:
        ValueError: 形状、对称性或半正定性不满足
    """
    A = np.asarray(value, dtype=float)
    if A.shape != (dim, dim):
        raise ValueError(f"{name} 必须是 {dim}×{dim} 矩阵，实际形状 {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} 含有 NaN 或 Inf")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > sym_tol * scale:
        raise ValueError(f"{name} 不对称")
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    if w[0] < -psd_tol:
        raise ValueError(f"{name} 不是半正定矩阵（最小特征值 {w[0]:.3e}）")
    if w[0] < 0.0:
        A = (V * np.clip(w, 0.0, None)) @ V.T
        A = 0.5 * (A + A.T)
    A.flags.writeable = False
    return A


def finite_vector(value, name: str, dim: int) -> np.ndarray:
    """校验有限实向量，返回只读数组"""
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.size != dim:
        raise ValueError(f"{name} 必须有 {dim} 个分量，实际 {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} 含有 NaN 或 Inf")
    v = v.copy()
    v.flags.writeable = False
    return v
