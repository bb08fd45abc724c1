"""
异常定义模块
"""

from typing import Any, Dict, Optional, Sequence


class LieGaussError(Exception):
    """所有库内异常的基类"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """转换为可写入日志的字典"""
        return {
            "error_type": type(self).__name__,
            "error_message": self.message,
            "details": self.details,
        }


class DimensionError(LieGaussError, ValueError):
    """矩阵维度不匹配"""


class InvalidParameterError(LieGaussError, ValueError):
    """参数不满足物理约束，field 指出出错字段"""

    def __init__(self, field: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"{field}: {message}", {"field": field, **(details or {})})
        self.field = field


class UnsupportedSpinError(LieGaussError, ValueError):
    """不支持的自旋表示"""


class ChannelArityError(LieGaussError, ValueError):
    """信道作用的量子比特数与目标不一致"""


class ConfigError(LieGaussError, ValueError):
    """配置文件或运行配置错误"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message, {"field": field} if field else None)
        self.field = field


class NumericError(LieGaussError, ArithmeticError):
    """数值计算失败（不收敛或残差过大）"""

    def __init__(self, message: str, residual: Optional[float] = None, tolerance: Optional[float] = None):
        super().__init__(message, {"residual": residual, "tolerance": tolerance})
        self.residual = residual
        self.tolerance = tolerance


class ExceptionalPointError(NumericError):
    """生成元在奇异点处不可对角化，对数分支无意义"""

    def __init__(self, condition: float, eigenvalues: Sequence[complex], threshold: float):
        message = (
            f"特征向量矩阵条件数 {condition:.3e} 超过阈值 {threshold:.1e}，"
            f"处于奇异点附近（特征值: {[complex(v) for v in eigenvalues]}）"
        )
        LieGaussError.__init__(self, message, {
            "condition": condition,
            "eigenvalues": [str(complex(v)) for v in eigenvalues],
            "threshold": threshold,
        })
        self.residual = None
        self.tolerance = threshold
        self.condition = condition
        self.eigenvalues = list(eigenvalues)


class DegenerateOutcomeError(LieGaussError, ArithmeticError):
    """后选择成功概率为零"""

    def __init__(self, success_prob: float, stage: str = ""):
        where = f"（{stage}）" if stage else ""
        super().__init__(f"后选择成功概率 {success_prob:.3e} 过小{where}，无法归一化", {
            "success_prob": success_prob,
            "stage": stage,
        })
        self.success_prob = success_prob
        self.stage = stage
