"""
信道构造命令：ptm、choi
"""

from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from typing_extensions import Self

from commands import resolve_output
from core.channel1q import (
    ChoiMatrix,
    NormalParams1Q,
    PauliTransferMatrix1Q,
    choi_from_fourier,
    choi_from_ptm,
    ptm,
)
from core.channel2q import (
    CorrelatedPauliParams,
    IsotropicNormalParams,
    NormalParams2Q,
    PauliTransferMatrix2Q,
    choi2,
    correlated_normal_ptm,
    correlated_pauli_ptm,
    normal_ptm2,
)
from core.commands import BaseCommand, RunConfig, RunContext, register_command, validation_field
from core.errors import LieGaussError, NumericError
from core.export import build_metadata, write_json

ChannelKind = Literal["normal1q", "normal2q", "isotropic", "c2", "cP", "pauli_table"]
Transfer = Union[PauliTransferMatrix1Q, PauliTransferMatrix2Q]


class ChannelSpec(BaseModel):
    """
    信道描述

    - normal1q: A (3×3), b (3)
    - normal2q: A (6×6), b (6)
    - isotropic: a1, a2, corr (= ρ)
    - c2: p, q, corr，a = −ln(1 − 4p)
    - cP: p, q, corr (= m)
    - pauli_table: table (4×4)
    """
    model_config = ConfigDict(extra="forbid")

    kind: ChannelKind = "normal1q"
    A: Optional[List[List[float]]] = None
    b: Optional[List[float]] = None
    a1: Optional[float] = None
    a2: Optional[float] = None
    p: Optional[float] = None
    q: Optional[float] = None
    corr: float = 0.0
    table: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check_physical(self) -> Self:
        # 加载时即校验物理约束
        self.build()
        return self

    @property
    def n_qubits(self) -> int:
        return 1 if self.kind == "normal1q" else 2

    def _params(self) -> Any:
        if self.kind == "normal1q":
            return NormalParams1Q(
                A=np.zeros((3, 3)) if self.A is None else self.A,
                b=np.zeros(3) if self.b is None else self.b,
            )
        if self.kind == "normal2q":
            return NormalParams2Q(
                A=np.zeros((6, 6)) if self.A is None else self.A,
                b=np.zeros(6) if self.b is None else self.b,
            )
        if self.kind == "isotropic":
            a1 = 0.0 if self.a1 is None else self.a1
            return IsotropicNormalParams(a1=a1, a2=a1 if self.a2 is None else self.a2, rho=self.corr)
        if self.kind == "c2":
            p = 0.0 if self.p is None else self.p
            return IsotropicNormalParams.from_pauli(p, p if self.q is None else self.q, self.corr)
        if self.kind == "cP":
            p = 0.0 if self.p is None else self.p
            return CorrelatedPauliParams(p=p, q=p if self.q is None else self.q, m=self.corr)
        if self.table is None:
            raise ValueError("table: pauli_table 需要 4×4 概率表")
        return CorrelatedPauliParams(table=self.table)

    def build(self) -> Tuple[Any, Transfer]:
        """
        构造参数对象与转移矩阵

        Raises:
            ValueError: 参数不满足物理约束，消息以出错字段开头
        """
        try:
            params = self._params()
        except ValidationError as e:
            raise ValueError(f"{validation_field(e) or self.kind}: {e.errors()[0].get('msg', '')}")
        except LieGaussError as e:
            raise ValueError(e.message)

        if isinstance(params, NormalParams1Q):
            return params, ptm(params)
        if isinstance(params, NormalParams2Q):
            return params, normal_ptm2(params)
        if isinstance(params, IsotropicNormalParams):
            return params, correlated_normal_ptm(params)
        return params, correlated_pauli_ptm(params)


def _params_dict(params: Any) -> Dict[str, Any]:
    if hasattr(params, "to_dict"):
        return params.to_dict()
    if isinstance(params, CorrelatedPauliParams):
        return {"weight_table": params.weight_table().tolist()}
    return params.model_dump()


def _complex_matrix(M: np.ndarray) -> Dict[str, List[List[float]]]:
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def _transfer_payload(transfer: Transfer) -> Dict[str, Any]:
    if isinstance(transfer, PauliTransferMatrix1Q):
        return {"R": transfer.R.tolist(), "T": transfer.full().tolist()}
    return {"T": transfer.T.tolist(), "block_form": transfer.block_form().tolist()}


def _choi_of(spec: ChannelSpec, params: Any, transfer: Transfer, method: str) -> ChoiMatrix:
    if isinstance(transfer, PauliTransferMatrix2Q):
        return choi2(transfer)
    if method == "fourier":
        return choi_from_fourier(params)
    return choi_from_ptm(transfer.R)


class PtmConfig(RunConfig):
    """ptm 命令的运行配置"""
    channel: ChannelSpec = Field(default_factory=ChannelSpec, description="信道描述")
    include_choi: bool = Field(default=False, description="同时输出 Choi 矩阵")


class ChoiConfig(RunConfig):
    """choi 命令的运行配置"""
    channel: ChannelSpec = Field(default_factory=ChannelSpec, description="信道描述")
    method: Literal["ptm", "fourier"] = Field(default="ptm", description="单比特 Choi 的构造方式")


@register_command
class PtmCommand(BaseCommand):
    """转移矩阵命令"""

    name = "ptm"
    description = "由正规分布参数或关联误差模型计算 Pauli 转移矩阵，可选输出 Choi 矩阵"
    config_model = PtmConfig

    def execute(self, config: PtmConfig, context: RunContext) -> Dict[str, Any]:
        params, transfer = config.channel.build()
        payload: Dict[str, Any] = {
            "kind": config.channel.kind,
            "n_qubits": config.channel.n_qubits,
            "params": _params_dict(params),
            **_transfer_payload(transfer),
        }
        if config.include_choi:
            choi = _choi_of(config.channel, params, transfer, "ptm")
            payload["choi"] = _complex_matrix(choi.C)
            payload["cptp"] = choi.cptp_report()

        path = resolve_output(context, self.name, "json")
        metadata = build_metadata(self.name, config.model_dump(mode="json"))
        write_json(payload, path, metadata)
        if context.state is not None:
            context.state.add_output(str(path))
        return {"success": True, "result": {"file_path": str(path), **payload}, "error": None}


@register_command
class ChoiCommand(BaseCommand):
    """Choi 矩阵命令"""

    name = "choi"
    description = "计算信道的 Choi 矩阵并检查完全正性与保迹性"
    config_model = ChoiConfig

    def execute(self, config: ChoiConfig, context: RunContext) -> Dict[str, Any]:
        params, transfer = config.channel.build()
        choi = _choi_of(config.channel, params, transfer, config.method)
        report = choi.cptp_report()
        if not choi.is_cptp():
            raise NumericError(f"Choi 矩阵不满足 CPTP 条件: {report}")

        payload = {
            "kind": config.channel.kind,
            "method": config.method if config.channel.n_qubits == 1 else "ptm",
            "params": _params_dict(params),
            "choi": _complex_matrix(choi.C),
            "cptp": report,
        }
        path = resolve_output(context, self.name, "json")
        write_json(payload, path, build_metadata(self.name, config.model_dump(mode="json")))
        if context.state is not None:
            context.state.add_output(str(path))
        return {"success": True, "result": {"file_path": str(path), **payload}, "error": None}
