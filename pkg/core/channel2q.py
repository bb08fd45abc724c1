"""
双量子比特正规信道模块（SU(2)⊗SU(2)）

基的约定：
- 字典序 Pauli 基 ½{σ_j ⊗ σ_k}，下标 μ = 4j + k，j 属于第一个比特
- 分块顺序 1 ⊕ R1 ⊕ R2 ⊕ W，见 BLOCK_ORDER；W 内部按 (σ_a ⊗ σ_b) 字典序
- A = [[A1, F], [Fᵀ, A2]]，b = (b1, b2)
"""

from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.channel1q import (
    U_SPHERICAL,
    ChoiMatrix,
    NormalParams1Q,
    choi_from_transfer,
    generator,
    m_matrix,
    master_equation_generator,
    pauli_basis,
)
from core.errors import InvalidParameterError, UnsupportedSpinError
from core.linalg import cross_matrix, expm, finite_vector, symmetric_psd
from core.montecarlo import RandomWalkEstimate, random_walk_estimate
from core.su2 import generators, twice_spin

BLOCK_ORDER = [0, 4, 8, 12, 1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15]
R1_INDEX = [4, 8, 12]
R2_INDEX = [1, 2, 3]
W_INDEX = [5, 6, 7, 9, 10, 11, 13, 14, 15]

A_CAP = 50.0
P_CAP_TOL = 1e-12

_LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI_CIVITA[_i, _j, _k] = 1.0
    _LEVI_CIVITA[_i, _k, _j] = -1.0


def lex_to_block(M) -> np.ndarray:
    """字典序 16×16 矩阵重排为分块顺序"""
    M = np.asarray(M)
    return M[np.ix_(BLOCK_ORDER, BLOCK_ORDER)]


def block_to_lex(M) -> np.ndarray:
    """lex_to_block 的逆"""
    M = np.asarray(M)
    out = np.empty_like(M)
    out[np.ix_(BLOCK_ORDER, BLOCK_ORDER)] = M
    return out


class NormalParams2Q(BaseModel):
    """SU(2)⊗SU(2) 上正规分布的参数（6×6 A，6 维 b）"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: np.ndarray
    b: np.ndarray = Field(default_factory=lambda: np.zeros(6))

    @field_validator("A", mode="before")
    @classmethod
    def _check_A(cls, value):
        return symmetric_psd(value, "A", 6)

    @field_validator("b", mode="before")
    @classmethod
    def _check_b(cls, value):
        return finite_vector(value, "b", 6)

    @classmethod
    def from_blocks(cls, A1, A2, F=None, b1=None, b2=None) -> "NormalParams2Q":
        F = np.zeros((3, 3)) if F is None else np.asarray(F, dtype=float)
        A = np.block([[np.asarray(A1, dtype=float), F], [F.T, np.asarray(A2, dtype=float)]])
        b = np.concatenate([
            np.zeros(3) if b1 is None else np.asarray(b1, dtype=float),
            np.zeros(3) if b2 is None else np.asarray(b2, dtype=float),
        ])
        return cls(A=A, b=b)

    @property
    def A1(self) -> np.ndarray:
        return self.A[:3, :3]

    @property
    def A2(self) -> np.ndarray:
        return self.A[3:, 3:]

    @property
    def F(self) -> np.ndarray:
        return self.A[:3, 3:]

    @property
    def b1(self) -> np.ndarray:
        return self.b[:3]

    @property
    def b2(self) -> np.ndarray:
        return self.b[3:]

    def marginal(self, qubit: int) -> NormalParams1Q:
        """单比特边缘分布（qubit = 1 或 2）"""
        if qubit == 1:
            return NormalParams1Q(A=self.A1, b=self.b1)
        if qubit == 2:
            return NormalParams1Q(A=self.A2, b=self.b2)
        raise InvalidParameterError("qubit", f"必须是 1 或 2，实际 {qubit}")

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}


def _isotropic_a(p: float) -> float:
    if p >= 0.25 - P_CAP_TOL:
        return A_CAP
    return float(-np.log(1.0 - 4.0 * p))


class IsotropicNormalParams(BaseModel):
    """关联各向同性误差：A1 = a1·1，A2 = a2·1，F = ρ√(a1 a2)·1，b = 0"""
    model_config = ConfigDict(frozen=True)

    a1: float = Field(ge=0.0)
    a2: float = Field(ge=0.0)
    rho: float = Field(ge=-1.0, le=1.0)

    @classmethod
    def from_pauli(cls, p: float, q: float, rho: float) -> "IsotropicNormalParams":
        """
        由单比特各向同性 Pauli 概率构造，a = −ln(1 − 4p)

        p ≥ 1/4 − 1e-12 时 a 截断为 50（数值上的完全退极化）
        """
        for name, value in (("p", p), ("q", q)):
            if not 0.0 <= value <= 0.25 + P_CAP_TOL:
                raise InvalidParameterError(name, f"必须在 [0, 1/4] 内，实际 {value}")
        return cls(a1=_isotropic_a(p), a2=_isotropic_a(q), rho=rho)

    @property
    def a12(self) -> float:
        return self.rho * float(np.sqrt(self.a1 * self.a2))

    def to_normal_params(self) -> NormalParams2Q:
        identity = np.eye(3)
        return NormalParams2Q.from_blocks(self.a1 * identity, self.a2 * identity, self.a12 * identity)


class CorrelatedPauliParams(BaseModel):
    """
    关联 Pauli 误差：独立误差与相同误差的混合，权重 m

    table 给出时为一般 4×4 概率表 p_ij（σ_i ⊗ σ_j）
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: float = Field(default=0.0, ge=0.0, le=0.25)
    q: float = Field(default=0.0, ge=0.0, le=0.25)
    m: float = Field(default=0.0, ge=0.0, le=1.0)
    table: Optional[np.ndarray] = None

    @field_validator("table", mode="before")
    @classmethod
    def _check_table(cls, value):
        if value is None:
            return None
        return validate_pauli_table(value)

    def weight_table(self) -> np.ndarray:
        """p_ij = (1 − m)·p_i·q_j + m·(p_i + q_i)/2·δ_ij，p_0 = 1 − 3p"""
        if self.table is not None:
            return self.table
        pi = np.array([1.0 - 3.0 * self.p, self.p, self.p, self.p])
        qj = np.array([1.0 - 3.0 * self.q, self.q, self.q, self.q])
        return (1.0 - self.m) * np.outer(pi, qj) + self.m * np.diag((pi + qj) / 2.0)


def validate_pauli_table(value) -> np.ndarray:
    """校验 4×4 概率表：非负且和为 1"""
    table = np.array(value, dtype=float)
    if table.shape != (4, 4):
        raise InvalidParameterError("table", f"必须是 4×4，实际形状 {table.shape}")
    if not np.all(np.isfinite(table)) or np.any(table < -1e-15):
        raise InvalidParameterError("table", "概率必须是有限非负数")
    if abs(table.sum() - 1.0) > 1e-12:
        raise InvalidParameterError("table", f"概率和必须为 1，实际 {table.sum():.15f}")
    table = np.clip(table, 0.0, None)
    table.flags.writeable = False
    return table


class PauliTransferMatrix2Q(BaseModel):
    """双比特转移矩阵，T 为字典序 16×16"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    T: np.ndarray

    @field_validator("T", mode="before")
    @classmethod
    def _check_T(cls, value):
        T = np.asarray(value)
        if T.shape != (16, 16):
            raise ValueError(f"T 必须是 16×16，实际形状 {T.shape}")
        if np.iscomplexobj(T):
            if np.max(np.abs(T.imag)) > 1e-10:
                raise ValueError("T 必须是实矩阵")
            T = T.real
        T = np.array(T, dtype=float)
        if not np.all(np.isfinite(T)):
            raise ValueError("T 含有 NaN 或 Inf")
        if np.linalg.svd(T, compute_uv=False)[0] > 1.0 + 1e-10:
            raise ValueError("T 的奇异值超过 1")
        T.flags.writeable = False
        return T

    @classmethod
    def from_blocks(cls, R1, R2, W) -> "PauliTransferMatrix2Q":
        """由 1 ⊕ R1 ⊕ R2 ⊕ W 组装"""
        block = np.zeros((16, 16))
        block[0, 0] = 1.0
        block[1:4, 1:4] = R1
        block[4:7, 4:7] = R2
        block[7:, 7:] = W
        return cls(T=block_to_lex(block))

    def block_form(self) -> np.ndarray:
        return lex_to_block(self.T)

    @property
    def R1(self) -> np.ndarray:
        return self.T[np.ix_(R1_INDEX, R1_INDEX)]

    @property
    def R2(self) -> np.ndarray:
        return self.T[np.ix_(R2_INDEX, R2_INDEX)]

    @property
    def W(self) -> np.ndarray:
        return self.T[np.ix_(W_INDEX, W_INDEX)]


def generator2(params: NormalParams2Q) -> np.ndarray:
    """
    分块形式的双比特生成元 𝓛⁽²⁾ = 0 ⊕ 𝓛(A1, b1) ⊕ 𝓛(A2, b2) ⊕ M

    M 的 3×3 子块 m_ca = 𝓛1_ca·1 + δ_ca·𝓛2 + ε_iac·[F 的第 i 行]ₓ（i 为第三个下标）

    Args:
        params: 双比特参数

    Returns:
        16×16 实矩阵（分块顺序）
    """
    L1 = generator(params.marginal(1))
    L2 = generator(params.marginal(2))
    F = params.F

    M = np.zeros((3, 3, 3, 3))
    for c in range(3):
        for a in range(3):
            sub = L1[c, a] * np.eye(3)
            if c == a:
                sub = sub + L2
            else:
                i = 3 - a - c
                sub = sub + _LEVI_CIVITA[i, a, c] * cross_matrix(F[i])
            M[c, :, a, :] = sub

    G = np.zeros((16, 16))
    G[1:4, 1:4] = L1
    G[4:7, 4:7] = L2
    G[7:, 7:] = M.reshape(9, 9)
    return G


def generator2_from_master_equation(params: NormalParams2Q) -> np.ndarray:
    """由六个生成元 L_i⊗1、1⊗L_k 的主方程直接构造（分块顺序），用于交叉验证"""
    half = generators("1/2")
    identity = np.eye(2)
    operators = [np.kron(L, identity) for L in half] + [np.kron(identity, L) for L in half]
    return lex_to_block(master_equation_generator(operators, params.A, params.b))


def normal_ptm2(params: NormalParams2Q) -> PauliTransferMatrix2Q:
    """R⁽²⁾ = exp(𝓛⁽²⁾)"""
    return PauliTransferMatrix2Q(T=block_to_lex(expm(generator2(params))))


def correlated_normal_coefficients(params: IsotropicNormalParams) -> Tuple[float, float, float, float, float]:
    """(E0, E1, E2, E3, E4)"""
    a12 = params.a12
    E0 = float(np.exp(-params.a1 - params.a2))
    E1 = E0 * (np.exp(2 * a12) + 2 * np.exp(-a12)) / 3.0
    E2 = E0 * (np.exp(2 * a12) - np.exp(-a12)) / 3.0
    E3 = E0 * np.cosh(a12)
    E4 = -E0 * np.sinh(a12)
    return E0, float(E1), float(E2), float(E3), float(E4)


def correlated_normal_ptm(params: IsotropicNormalParams) -> PauliTransferMatrix2Q:
    """
    关联各向同性正规信道的闭式：1 ⊕ e^{−a1}·1 ⊕ e^{−a2}·1 ⊕ W_c2

    W_c2：(x,x)、(y,y)、(z,z) 三个对角位置为 E1、彼此耦合 E2；
    其余对角为 E3，(a,b) 与 (b,a) 之间耦合 E4。
    """
    _, E1, E2, E3, E4 = correlated_normal_coefficients(params)
    W = np.zeros((9, 9))
    parallel = [0, 4, 8]
    for i in parallel:
        for j in parallel:
            W[i, j] = E1 if i == j else E2
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            W[3 * a + b, 3 * a + b] = E3
            W[3 * a + b, 3 * b + a] = E4
    return PauliTransferMatrix2Q.from_blocks(
        np.exp(-params.a1) * np.eye(3), np.exp(-params.a2) * np.eye(3), W
    )


def correlated_pauli_ptm(params: CorrelatedPauliParams) -> PauliTransferMatrix2Q:
    """
    关联 Pauli 信道的闭式：1 ⊕ (R_P(p) + c) ⊕ (R_P(q) − c) ⊕ W_cP

    R_P(p) = (1 − 4p)·1，c = 2m(p − q)·1，
    W_cP = diag(w1, w2, w2, w2, w1, w2, w2, w2, w1)。
    给出 table 时按一般概率表计算。
    """
    if params.table is not None:
        return general_pauli_ptm(params.table)
    p, q, m = params.p, params.q, params.m
    c = 2.0 * m * (p - q)
    w1 = 1.0 + 4.0 * (m - 1.0) * (p + q * (1.0 - 4.0 * p))
    w2 = w1 - 2.0 * m * (p + q)
    W = np.diag([w1, w2, w2, w2, w1, w2, w2, w2, w1])
    return PauliTransferMatrix2Q.from_blocks(
        (1.0 - 4.0 * p + c) * np.eye(3), (1.0 - 4.0 * q - c) * np.eye(3), W
    )


def general_pauli_ptm(table) -> PauliTransferMatrix2Q:
    """
    Λ[ρ] = Σ p_ij (σ_i⊗σ_j) ρ (σ_i⊗σ_j) 的转移矩阵，按共轭求和计算

    Args:
        table: 4×4 概率表

    Returns:
        PauliTransferMatrix2Q（在 Pauli 乘积基下为对角阵）
    """
    weights = validate_pauli_table(table).reshape(16)
    basis = np.stack(pauli_basis(2))
    images = np.zeros_like(basis)
    for w, K in zip(weights, basis):
        if w == 0.0:
            continue
        images += w * np.einsum("ij,mjk,kl->mil", K, basis, K)
    T = np.einsum("nij,mji->nm", basis, images).real / 4.0
    return PauliTransferMatrix2Q(T=T)


def _fourier_operators(s1, s2):
    pair = (twice_spin(s1), twice_spin(s2))
    if pair not in ((0, 2), (2, 0), (2, 2)):
        raise UnsupportedSpinError(f"仅支持 (s1, s2) ∈ {{(0,1), (1,0), (1,1)}}，实际 ({s1}, {s2})")
    G1, G2 = generators(s1), generators(s2)
    I1 = np.eye(G1[0].shape[0])
    I2 = np.eye(G2[0].shape[0])
    return [np.kron(L, I2) for L in G1] + [np.kron(I1, L) for L in G2]


def fourier_coeff2(params: NormalParams2Q, s1, s2) -> np.ndarray:
    """
    傅里叶系数 e^{−𝓜_{s1,s2}}，𝓜 由 L^(s1)⊗1 与 1⊗L^(s2) 组装

    Args:
        params: 双比特参数
        s1, s2: 自旋对，(0,1)、(1,0) 或 (1,1)

    Returns:
        3×3 或 9×9 复矩阵
    """
    operators = _fourier_operators(s1, s2)
    return expm(-m_matrix(params.A, params.b, operators))


def ptm2_from_fourier(params: NormalParams2Q) -> PauliTransferMatrix2Q:
    """由 (1,0)、(0,1)、(1,1) 傅里叶系数换基重建完整转移矩阵"""
    U = U_SPHERICAL
    UU = np.kron(U, U)
    R1 = U @ fourier_coeff2(params, 1, 0) @ U.conj().T
    R2 = U @ fourier_coeff2(params, 0, 1) @ U.conj().T
    W = UU @ fourier_coeff2(params, 1, 1) @ UU.conj().T
    return PauliTransferMatrix2Q.from_blocks(R1.real, R2.real, W.real)


def choi2(ptm: PauliTransferMatrix2Q) -> ChoiMatrix:
    """16×16 Choi 矩阵 Σ |ij⟩⟨kl| ⊗ Λ[|ij⟩⟨kl|]"""
    return choi_from_transfer(ptm.T)


def random_walk_ptm2(
    params: NormalParams2Q,
    n_steps: int,
    n_samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> RandomWalkEstimate:
    """随机游走估计字典序 16×16 转移矩阵，u = exp_map(n₁..₃) ⊗ exp_map(n₄..₆)"""
    return random_walk_estimate(
        params.A, params.b, n_qubits=2, n_steps=n_steps, n_samples=n_samples,
        seed=seed, chunk_size=chunk_size, max_workers=max_workers,
    )


def kron_ptm(R1, R2) -> PauliTransferMatrix2Q:
    """两个独立单比特信道的张量积"""
    T1 = np.eye(4)
    T1[1:, 1:] = np.asarray(R1, dtype=float)
    T2 = np.eye(4)
    T2[1:, 1:] = np.asarray(R2, dtype=float)
    return PauliTransferMatrix2Q(T=np.kron(T1, T2))


def pauli_branches(table: Sequence[Sequence[float]]):
    """(权重, σ_i⊗σ_j) 列表，跳过零权重"""
    weights = validate_pauli_table(table)
    basis = pauli_basis(2)
    return [(float(weights[i, j]), basis[4 * i + j]) for i in range(4) for j in range(4) if weights[i, j] > 0.0]
