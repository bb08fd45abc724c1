"""
单量子比特正规信道模块
生成元、Pauli 转移矩阵、Choi 矩阵、Pauli 信道对应、等价类枚举、特征值轨迹

约定：
- Bloch 坐标 r_a = tr(σ_a ρ)，转移矩阵 R 作用为 r' = R r
- 生成元 𝓛 = ½(A − tr(A)·1) + [b]ₓ，R = e^𝓛
- 𝓜₁ = ½ Σ A_ij L_i L_j + i Σ b_i L_i（自旋 1），𝓕₁ = e^{−𝓜₁}
- Choi 矩阵 C = Σ |i⟩⟨j| ⊗ Λ[|i⟩⟨j|]，行指标 i·d + k
"""

from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import DimensionError, InvalidParameterError
from core.linalg import (
    Matrix,
    axial_vector,
    cross_matrix,
    eig,
    expm,
    finite_vector,
    real_log_branches,
    sym,
    symmetric_psd,
)
from core.montecarlo import RandomWalkEstimate, random_walk_estimate
from core.su2 import PAULIS, generators

PSD_ACCEPT_TOL = 1e-10
DEDUPE_TOL = 1e-8
COMMUTING_TOL = 1e-9

# 球基 (m = 1, 0, −1) 到笛卡尔基的酉变换：U(−iL_k)U† = [e_k]ₓ
U_SPHERICAL = np.array([
    [-1j, 0.0, 1j],
    [1.0, 0.0, 1.0],
    [0.0, np.sqrt(2.0) * 1j, 0.0],
], dtype=complex) / np.sqrt(2.0)


class NormalParams1Q(BaseModel):
    """SU(2) 上正规分布的参数：扩散矩阵 A 与漂移向量 b"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: np.ndarray
    b: np.ndarray = Field(default_factory=lambda: np.zeros(3))

    @field_validator("A", mode="before")
    @classmethod
    def _check_A(cls, value):
        return symmetric_psd(value, "A", 3)

    @field_validator("b", mode="before")
    @classmethod
    def _check_b(cls, value):
        return finite_vector(value, "b", 3)

    @classmethod
    def diagonal(cls, a_diag: Sequence[float], b: Optional[Sequence[float]] = None) -> "NormalParams1Q":
        return cls(A=np.diag(np.asarray(a_diag, dtype=float)), b=np.zeros(3) if b is None else b)

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    def distance(self, other: "NormalParams1Q") -> float:
        return float(np.linalg.norm(self.A - other.A) + np.linalg.norm(self.b - other.b))


class PauliChannelParams(BaseModel):
    """Pauli 信道概率 p1, p2, p3（分别对应 σx, σy, σz）"""
    model_config = ConfigDict(frozen=True)

    p1: float = Field(ge=0.0, le=1.0)
    p2: float = Field(ge=0.0, le=1.0)
    p3: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_total(self):
        if self.p1 + self.p2 + self.p3 > 1.0 + 1e-12:
            raise ValueError("p1 + p2 + p3 不能超过 1")
        return self

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    @classmethod
    def isotropic(cls, p: float) -> "PauliChannelParams":
        return cls(p1=p, p2=p, p3=p)


class PauliTransferMatrix1Q(BaseModel):
    """幺正保持单比特信道的 3×3 Bloch 形式转移矩阵"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    R: np.ndarray

    @field_validator("R", mode="before")
    @classmethod
    def _check_R(cls, value):
        R = np.asarray(value)
        if R.shape != (3, 3):
            raise ValueError(f"R 必须是 3×3，实际形状 {R.shape}")
        if np.iscomplexobj(R):
            if np.max(np.abs(R.imag)) > 1e-10:
                raise ValueError("R 必须是实矩阵")
            R = R.real
        R = np.array(R, dtype=float)
        if not np.all(np.isfinite(R)):
            raise ValueError("R 含有 NaN 或 Inf")
        if np.linalg.svd(R, compute_uv=False)[0] > 1.0 + 1e-10:
            raise ValueError("R 的奇异值超过 1，不是压缩映射")
        R.flags.writeable = False
        return R

    def full(self) -> np.ndarray:
        """4×4 形式 1 ⊕ R（基 {1, σx, σy, σz}）"""
        T = np.zeros((4, 4))
        T[0, 0] = 1.0
        T[1:, 1:] = self.R
        return T


class ChoiMatrix(BaseModel):
    """
    Choi 矩阵 C = Σ |i⟩⟨j| ⊗ Λ[|i⟩⟨j|]

    构造时只检查形状；CPTP 性质由 cptp_report / is_cptp 检查。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    C: np.ndarray

    @field_validator("C", mode="before")
    @classmethod
    def _check_C(cls, value):
        C = np.array(value, dtype=complex)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ValueError(f"C 必须是方阵，实际形状 {C.shape}")
        d = int(round(np.sqrt(C.shape[0])))
        if d * d != C.shape[0] or d < 2:
            raise ValueError(f"C 的维度 {C.shape[0]} 不是 d²")
        if not np.all(np.isfinite(C)):
            raise ValueError("C 含有 NaN 或 Inf")
        C.flags.writeable = False
        return C

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self.C.shape[0])))

    def tensor(self) -> np.ndarray:
        """C4[i, k, j, l]，对应行 i·d + k、列 j·d + l"""
        d = self.d
        return self.C.reshape(d, d, d, d)

    def apply(self, X) -> np.ndarray:
        """Λ[X] = Tr_in[(Xᵀ ⊗ 1) C]"""
        return np.einsum("ij,ikjl->kl", np.asarray(X, dtype=complex), self.tensor())

    def cptp_report(self) -> dict:
        """
        CPTP 检查

        Returns:
            厄米误差、最小特征值、保迹误差、幺正保持误差
        """
        C4 = self.tensor()
        d = self.d
        identity = np.eye(d)
        hermitian_error = float(np.max(np.abs(self.C - self.C.conj().T)))
        min_eigenvalue = float(np.linalg.eigvalsh(0.5 * (self.C + self.C.conj().T))[0])
        tp_error = float(np.max(np.abs(np.einsum("ikjk->ij", C4) - identity)))
        unital_error = float(np.max(np.abs(np.einsum("ikil->kl", C4) - identity)))
        return {
            "hermitian_error": hermitian_error,
            "min_eigenvalue": min_eigenvalue,
            "trace_preserving_error": tp_error,
            "unital_error": unital_error,
        }

    def is_cptp(self, tol: float = 1e-10, psd_tol: float = 1e-9, unital: bool = False) -> bool:
        report = self.cptp_report()
        ok = (
            report["hermitian_error"] <= tol
            and report["min_eigenvalue"] >= -psd_tol
            and report["trace_preserving_error"] <= tol
        )
        return ok and (not unital or report["unital_error"] <= tol)


@lru_cache(maxsize=4)
def pauli_basis(n_qubits: int) -> Tuple[np.ndarray, ...]:
    """
    n 比特 Pauli 乘积基，字典序：P_{4j+k} = σ_j ⊗ σ_k（j 为第一个比特）

    Args:
        n_qubits: 1 或 2

    Returns:
        4ⁿ 个 2ⁿ×2ⁿ 矩阵
    """
    if n_qubits == 1:
        return tuple(P.copy() for P in PAULIS)
    if n_qubits == 2:
        return tuple(np.kron(Pj, Pk) for Pj in PAULIS for Pk in PAULIS)
    raise DimensionError(f"仅支持 1 或 2 个量子比特，实际 {n_qubits}")


def _n_qubits_for(d: int) -> int:
    if d == 2:
        return 1
    if d == 4:
        return 2
    raise DimensionError(f"仅支持维度 2 或 4，实际 {d}")


def choi_from_transfer(T) -> ChoiMatrix:
    """
    由完整 Pauli 转移矩阵（含恒等分量）构造 Choi 矩阵

    C = (1/d) Σ_{μν} T_νμ P_μᵀ ⊗ P_ν
    """
    T = np.asarray(T, dtype=float)
    d = int(round(np.sqrt(T.shape[0])))
    if T.shape != (d * d, d * d):
        raise DimensionError(f"转移矩阵形状 {T.shape} 无效")
    basis = pauli_basis(_n_qubits_for(d))
    stacked = np.stack(basis)
    # Λ[P_μ] = Σ_ν T_νμ P_ν
    images = np.einsum("nm,nab->mab", T, stacked)
    C = sum(np.kron(basis[mu].T, images[mu]) for mu in range(d * d)) / d
    return ChoiMatrix(C=C)


def transfer_from_choi(choi: ChoiMatrix) -> np.ndarray:
    """Choi 矩阵到完整 Pauli 转移矩阵：T_βα = (1/d) tr[(P_αᵀ ⊗ P_β) C]"""
    d = choi.d
    basis = pauli_basis(_n_qubits_for(d))
    images = np.stack([choi.apply(P) for P in basis])
    return np.einsum("bkl,alk->ba", np.stack(basis), images).real / d


def generator(params: NormalParams1Q) -> Matrix:
    """
    Pauli 表示下的生成元 𝓛 = ½(A − tr(A)·1) + [b]ₓ

    Args:
        params: 正规分布参数

    Returns:
        3×3 实矩阵
    """
    return 0.5 * (params.A - np.trace(params.A) * np.eye(3)) + cross_matrix(params.b)


def m_matrix(A, b, operators: Sequence[np.ndarray]) -> Matrix:
    """𝓜 = ½ Σ A_ij L_i L_j + i Σ b_i L_i，算符个数与 A 的维度一致"""
    ops = [np.asarray(L, dtype=complex) for L in operators]
    M = np.zeros_like(ops[0])
    for i, Li in enumerate(ops):
        M += 1j * b[i] * Li
        for j, Lj in enumerate(ops):
            if A[i, j] != 0.0:
                M += 0.5 * A[i, j] * (Li @ Lj)
    return M


def m1_matrix(params: NormalParams1Q) -> Matrix:
    """自旋 1 表示下的生成元 𝓜₁（球基 m = 1, 0, −1）"""
    return m_matrix(params.A, params.b, generators(1))


def fourier_coefficient(params: NormalParams1Q, s="1") -> Matrix:
    """
    傅里叶系数 𝓕_s = e^{−𝓜_s}

    Args:
        params: 正规分布参数
        s: 自旋标签（1/2 或 1）

    Returns:
        (2s+1)×(2s+1) 复矩阵
    """
    return expm(-m_matrix(params.A, params.b, generators(s)))


def ptm(params: NormalParams1Q) -> PauliTransferMatrix1Q:
    """R = e^𝓛"""
    return PauliTransferMatrix1Q(R=expm(generator(params)))


def ptm_from_fourier(params: NormalParams1Q) -> PauliTransferMatrix1Q:
    """由自旋 1 傅里叶系数换基得到 R = U·𝓕₁·U†"""
    F = fourier_coefficient(params, 1)
    return PauliTransferMatrix1Q(R=U_SPHERICAL @ F @ U_SPHERICAL.conj().T)


def choi_from_ptm(R) -> ChoiMatrix:
    """幺正保持单比特信道的 Choi 矩阵"""
    if not isinstance(R, PauliTransferMatrix1Q):
        R = PauliTransferMatrix1Q(R=R)
    return choi_from_transfer(R.full())


def ptm_from_choi(choi: ChoiMatrix) -> PauliTransferMatrix1Q:
    """choi_from_ptm 的逆，取 Bloch 块"""
    if choi.d != 2:
        raise DimensionError(f"需要单比特 Choi 矩阵，实际 d = {choi.d}")
    return PauliTransferMatrix1Q(R=transfer_from_choi(choi)[1:, 1:])


def choi_from_fourier(params: NormalParams1Q) -> ChoiMatrix:
    """
    由 𝓕₁ = e^{−𝓜₁} 的五个独立元素构造 Choi 矩阵

    其余元素由厄米性、保迹性与幺正保持性补全。
    """
    F = fourier_coefficient(params, 1)
    # 球基下标：m = +1 → 0, m = 0 → 1, m = −1 → 2
    l00_00 = 0.5 + 0.5 * F[1, 1]
    l00_10 = F[2, 1] / np.sqrt(2.0)
    l10_00 = F[1, 2] / np.sqrt(2.0)
    l10_10 = F[2, 2]
    l10_01 = -F[0, 2]

    block_00 = np.array([[l00_00, np.conj(l00_10)], [l00_10, 1.0 - l00_00]])
    block_11 = np.array([[1.0 - l00_00, -np.conj(l00_10)], [-l00_10, l00_00]])
    block_10 = np.array([[l10_00, l10_01], [l10_10, -l10_00]])
    block_01 = block_10.conj().T
    return ChoiMatrix(C=np.block([[block_00, block_01], [block_10, block_11]]))


def pauli_ptm(params: PauliChannelParams) -> PauliTransferMatrix1Q:
    """Pauli 信道的转移矩阵 R_jj = 1 − 2(p_k + p_l)"""
    p = params.as_array()
    return PauliTransferMatrix1Q(R=np.diag(1.0 - 2.0 * (p.sum() - p)))


def pauli_probs(A_diag: Sequence[float]) -> PauliChannelParams:
    """
    对角 A、b = 0 的正规信道对应的 Pauli 概率

    p_j = (1 − e^{−tr(A)/2} Σ_k (−1)^{δ_jk} e^{A_kk/2}) / 4

    Args:
        A_diag: 三个非负对角元

    Returns:
        PauliChannelParams
    """
    a = np.asarray(A_diag, dtype=float).reshape(-1)
    if a.size != 3 or np.any(a < 0) or not np.all(np.isfinite(a)):
        raise InvalidParameterError("A_diag", "需要三个有限的非负实数")
    R = np.exp(-(a.sum() - a) / 2.0)
    p = (1.0 + R - (R.sum() - R)) / 4.0
    # 各向异性时单个 p_j 可接近 1/2，只截断舍入误差
    p = np.clip(p, 0.0, None)
    return PauliChannelParams(p1=float(p[0]), p2=float(p[1]), p3=float(p[2]))


def diffusion_from_pauli(params: PauliChannelParams, psd_tol: float = 1e-12) -> np.ndarray:
    """
    pauli_probs 的逆：由 Pauli 概率求对角扩散矩阵

    Args:
        params: Pauli 概率
        psd_tol: 负对角元的截断容差

    Returns:
        A 的三个对角元

    Raises:
        InvalidParameterError: R_jj ≤ 0 或所得 A 非半正定（不是正规信道）
    """
    R = np.diag(pauli_ptm(params).R)
    if np.any(R <= 0.0):
        raise InvalidParameterError("p", f"p_k + p_l 必须小于 1/2，R 对角元 {R.tolist()}")
    y = -2.0 * np.log(R)
    a = y.sum() / 2.0 - y
    if np.any(a < -psd_tol):
        raise InvalidParameterError("p", f"该 Pauli 信道不是正规信道，A 对角元 {a.tolist()}")
    return np.clip(a, 0.0, None)


def master_equation_generator(operators: Sequence[np.ndarray], A, b) -> np.ndarray:
    """
    由主方程 dρ/dt = −i[Σ b_i L_i, ρ] + Σ A_ij (L_i ρ L_j − ½{L_j L_i, ρ})
    构造完整 Pauli 基生成元 G_μν = (1/d) tr(P_μ 𝒟[P_ν])

    Args:
        operators: 厄米算符 L_i（d×d，d = 2 或 4）
        A: 扩散矩阵
        b: 漂移向量

    Returns:
        d²×d² 实矩阵
    """
    ops = [np.asarray(L, dtype=complex) for L in operators]
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    d = ops[0].shape[0]
    basis = pauli_basis(_n_qubits_for(d))
    H = sum(b[i] * ops[i] for i in range(len(ops)))

    def dissipator(rho):
        out = -1j * (H @ rho - rho @ H)
        for i, Li in enumerate(ops):
            for j, Lj in enumerate(ops):
                if A[i, j] == 0.0:
                    continue
                LjLi = Lj @ Li
                out += A[i, j] * (Li @ rho @ Lj - 0.5 * (LjLi @ rho + rho @ LjLi))
        return out

    images = [dissipator(P) for P in basis]
    G = np.array([[np.trace(P_mu @ img).real / d for img in images] for P_mu in basis])
    return G


def lindblad_superoperator(params: NormalParams1Q) -> Matrix:
    """直接由主方程得到的 3×3 Bloch 生成元（与 generator 独立构造）"""
    G = master_equation_generator(generators("1/2"), params.A, params.b)
    return G[1:, 1:]


# --- 等价类 ---


class ClassMember(BaseModel):
    """等价类成员；offset 为相对输入参数的对数分支偏移"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: NormalParams1Q
    offset: int


class EquivalenceClass(BaseModel):
    """诱导同一信道的正规分布集合"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    members: List[ClassMember]
    infinite: bool = False
    axis: Optional[List[float]] = None
    truncated: bool = False

    @property
    def count(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[NormalParams1Q]:
        return iter(m.params for m in self.members)


def commuting_axis(params: NormalParams1Q, tol: float = COMMUTING_TOL) -> Optional[np.ndarray]:
    """
    判断参数是否属于无穷等价族

    条件：b 是 A 的特征向量且 A 在 b⊥ 上为数乘；b = 0 时 A 有重特征值。

    Returns:
        旋转轴 n̂（单位向量），不满足时返回 None
    """
    A, b = params.A, params.b
    scale = max(1.0, float(np.max(np.abs(A))))
    norm_b = float(np.linalg.norm(b))
    if norm_b > tol:
        n = b / norm_b
        An = A @ n
        if np.linalg.norm(An - (n @ An) * n) > tol * scale:
            return None
        P = np.eye(3) - np.outer(n, n)
        PAP = P @ A @ P
        c = np.trace(PAP) / 2.0
        if np.max(np.abs(PAP - c * P)) > tol * scale:
            return None
        return n

    w, V = np.linalg.eigh(A)
    gaps = np.diff(w)
    if np.all(gaps <= tol * scale):
        return np.array([0.0, 0.0, 1.0])
    if gaps[0] <= tol * scale:
        return V[:, 2]
    if gaps[1] <= tol * scale:
        return V[:, 0]
    return None


def _accept(L: np.ndarray, psd_tol: float) -> Optional[NormalParams1Q]:
    # tr(S) = −tr(A)，故 A = 2S − tr(S)·1
    S = sym(L)
    A = 2.0 * S - np.trace(S) * np.eye(3)
    if np.linalg.eigvalsh(A)[0] < -psd_tol:
        return None
    return NormalParams1Q(A=A, b=axial_vector(L))


def equivalence_class_info(
    params: NormalParams1Q,
    k_max: int = 6,
    max_members: Optional[int] = None,
    defect_threshold: float = 1e8,
    pair_tol: float = 1e-8,
) -> EquivalenceClass:
    """
    枚举诱导同一信道 R = ptm(params) 的全部正规分布

    对 R 的每个实对数分支 L，由 𝓛 = ½(A − tr(A)·1) + [b]ₓ 反解
    A' = 2·sym(L) − tr(sym(L))·1、b' = axial(L)，保留 A' 半正定的解。
    无穷族（b + 2πk·n̂）按 |k| ≤ k_max 截断并显式列出。

    Args:
        params: 输入参数（总在结果中）
        k_max: 最大分支序号
        max_members: 成员数上限，None 表示不限
        defect_threshold: 奇异点判据
        pair_tol: 共轭配对容差

    Returns:
        EquivalenceClass，成员按 |offset| 排序

    Raises:
        ExceptionalPointError: 生成元在奇异点处不可对角化
    """
    R = ptm(params).R
    branches = real_log_branches(R, k_max, defect_threshold=defect_threshold, pair_tol=pair_tol)

    candidates: List[Tuple[int, NormalParams1Q]] = []
    for k, L in branches:
        member = _accept(L, PSD_ACCEPT_TOL)
        if member is not None:
            candidates.append((k, member))

    k_input = None
    for k, member in candidates:
        if member.distance(params) < DEDUPE_TOL:
            k_input = k
            break

    members: List[ClassMember] = [ClassMember(params=params, offset=0)]

    def _add(candidate: NormalParams1Q, offset: int) -> None:
        if any(candidate.distance(m.params) < DEDUPE_TOL for m in members):
            return
        members.append(ClassMember(params=candidate, offset=offset))

    for k, member in candidates:
        _add(member, k - (k_input if k_input is not None else 0))

    axis = commuting_axis(params)
    if axis is not None:
        for j in range(-k_max, k_max + 1):
            if j == 0:
                continue
            _add(NormalParams1Q(A=params.A, b=params.b + 2.0 * np.pi * j * axis), j)

    members.sort(key=lambda m: (abs(m.offset), m.offset))
    truncated = False
    if max_members is not None and len(members) > max_members:
        members = members[:max_members]
        truncated = True
    return EquivalenceClass(
        members=members,
        infinite=axis is not None,
        axis=None if axis is None else axis.tolist(),
        truncated=truncated,
    )


def equivalence_class(params: NormalParams1Q, k_max: int = 6, **kwargs) -> List[NormalParams1Q]:
    """等价类成员列表，参数同 equivalence_class_info"""
    return list(equivalence_class_info(params, k_max, **kwargs))


# --- 特征值轨迹 ---


class EigenTracePoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    magnitude: float
    eigenvalues: np.ndarray
    paired: bool


class EigenTrace(BaseModel):
    """生成元特征值随 |b| 的变化；pair_onset 为首次出现共轭对的 |b|"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: List[EigenTracePoint]
    pair_onset: Optional[float] = None


def eigenvalue_trace(
    A,
    b_dir: Sequence[float],
    magnitudes: Sequence[float],
    imag_tol: float = 1e-7,
) -> EigenTrace:
    """
    追踪 generator(A, m·b_dir) 的特征值

    Args:
        A: 3×3 半正定矩阵
        b_dir: 单位方向
        magnitudes: |b| 取值
        imag_tol: 判定共轭对的虚部阈值

    Returns:
        EigenTrace
    """
    direction = np.asarray(b_dir, dtype=float).reshape(-1)
    if direction.size != 3 or abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise InvalidParameterError("b_dir", "必须是三维单位向量")
    points: List[EigenTracePoint] = []
    onset = None
    for m in magnitudes:
        params = NormalParams1Q(A=A, b=float(m) * direction)
        values = eig(generator(params)).values
        paired = bool(np.max(np.abs(values.imag)) > imag_tol)
        if paired and onset is None:
            onset = float(m)
        points.append(EigenTracePoint(magnitude=float(m), eigenvalues=values, paired=paired))
    return EigenTrace(points=points, pair_onset=onset)


def random_walk_ptm(
    params: NormalParams1Q,
    n_steps: int,
    n_samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> RandomWalkEstimate:
    """
    随机游走估计 R（验证用）

    Returns:
        RandomWalkEstimate，mean/stderr 为 3×3
    """
    return random_walk_estimate(
        params.A, params.b, n_qubits=1, n_steps=n_steps, n_samples=n_samples,
        seed=seed, chunk_size=chunk_size, max_workers=max_workers,
    )
