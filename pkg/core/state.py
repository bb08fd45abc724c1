"""
运行状态管理模块
"""

import time
import uuid
from datetime import datetime
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

if TYPE_CHECKING:
    from core.execution_logger import ExecutionLogger
    from core.realtime_logger import RealtimeLogger


class RunStatus(Enum):
    """运行状态枚举"""
    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RunStep(BaseModel):
    """运行步骤（一次命令或一次检查）"""
    step_id: int
    description: str
    status: str = "pending"  # pending, running, completed, failed
    result: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    elapsed_seconds: Optional[float] = None


class RunState(BaseModel):
    """单次 CLI 运行的状态"""
    model_config = ConfigDict(extra="allow")

    run_id: str = Field(default_factory=lambda: uuid.uuid4().hex)
    command: str = ""
    status: RunStatus = RunStatus.IDLE
    config: Dict[str, Any] = Field(default_factory=dict)
    steps: List[RunStep] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    created_at: datetime = Field(default_factory=datetime.now)
    updated_at: datetime = Field(default_factory=datetime.now)

    # 日志记录器不参与校验与序列化
    _realtime_logger: Any = PrivateAttr(default=None)
    _execution_logger: Any = PrivateAttr(default=None)
    _started: Dict[int, float] = PrivateAttr(default_factory=dict)

    def attach_loggers(
        self,
        realtime_logger: Optional["RealtimeLogger"] = None,
        execution_logger: Optional["ExecutionLogger"] = None,
    ) -> None:
        self._realtime_logger = realtime_logger
        self._execution_logger = execution_logger

    @property
    def realtime_logger(self) -> Optional["RealtimeLogger"]:
        return self._realtime_logger

    @property
    def execution_logger(self) -> Optional["ExecutionLogger"]:
        return self._execution_logger

    def set_status(self, status: RunStatus) -> None:
        """设置运行状态，并转发到两个日志"""
        old_status = self.status.value
        self.status = status
        self.updated_at = datetime.now()
        if self._realtime_logger:
            self._realtime_logger.log_status_change(old_status, status.value)
        if self._execution_logger:
            self._execution_logger.log_state_change(old_status, status.value, {"command": self.command})

    def add_step(self, description: str) -> RunStep:
        step = RunStep(step_id=len(self.steps) + 1, description=description, status="running")
        self.steps.append(step)
        self._started[step.step_id] = time.perf_counter()
        self.updated_at = datetime.now()
        if self._realtime_logger:
            self._realtime_logger.log_step(step.step_id, description, step.status)
        return step

    def finish_step(
        self,
        step_id: int,
        result: Optional[Dict[str, Any]] = None,
        error: Optional[str] = None,
    ) -> None:
        """结束步骤；有 error 时标记为失败"""
        for step in self.steps:
            if step.step_id != step_id:
                continue
            step.status = "failed" if error else "completed"
            step.result = result
            step.error = error
            started = self._started.pop(step_id, None)
            if started is not None:
                step.elapsed_seconds = time.perf_counter() - started
                self.timings[step.description] = step.elapsed_seconds
            self.updated_at = datetime.now()
            if self._realtime_logger:
                self._realtime_logger.log_step(step.step_id, step.description, step.status)
            break

    def add_output(self, path: str) -> None:
        self.outputs.append(str(path))
        self.updated_at = datetime.now()

    def log_progress(self, label: str, done: int, total: int) -> None:
        """扫描进度，转发到两个日志"""
        if self._realtime_logger:
            self._realtime_logger.log_progress(label, done, total)
        if self._execution_logger:
            self._execution_logger.log_sweep_progress(label, done, total)

    def log_warning(self, message: str, context: Optional[Dict[str, Any]] = None) -> None:
        if self._realtime_logger:
            self._realtime_logger.log_warning(message)
        if self._execution_logger:
            self._execution_logger.log_warning(message, context)

    def get_summary(self) -> Dict[str, Any]:
        """获取运行摘要"""
        return {
            "run_id": self.run_id,
            "command": self.command,
            "status": self.status.value,
            "steps_count": len(self.steps),
            "failed_steps": [s.description for s in self.steps if s.status == "failed"],
            "outputs": list(self.outputs),
            "timings": dict(self.timings),
            "created_at": self.created_at.isoformat(),
            "updated_at": self.updated_at.isoformat(),
        }
