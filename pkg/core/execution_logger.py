"""
执行日志记录器 - 以 JSON 条目记录一次运行的全部细节
"""

import json
import os
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np


def to_jsonable(value: Any) -> Any:
    """numpy 标量/数组与复数转换为可序列化对象"""
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if hasattr(value, "columns") and hasattr(value, "to_dict"):
        # 表格只记录形状
        return {"rows": len(value), "columns": [str(c) for c in value.columns]}
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


class ExecutionLogger:
    """执行日志记录器"""

    def __init__(self, run_id: str, logs_dir: str = "logs"):
        """
        初始化执行日志记录器

        Args:
            run_id: 运行 ID
            logs_dir: 日志目录
        """
        self.run_id = run_id
        self.logs_dir = logs_dir
        self.log_file: Optional[Path] = None
        self.file_handle = None
        self.lock = threading.Lock()
        self._initialize_log_file()

    def _initialize_log_file(self) -> None:
        os.makedirs(self.logs_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file = Path(self.logs_dir) / f"execution_{self.run_id[:8]}_{timestamp}.log"
        try:
            self.file_handle = open(self.log_file, "a", encoding="utf-8")
            self._write_header()
        except OSError as e:
            print(f"⚠️  无法创建执行日志文件: {e}")
            self.file_handle = None

    def _write_header(self) -> None:
        if self.file_handle:
            header = f"""
{'=' * 100}
LieGauss 执行日志
运行 ID: {self.run_id}
开始时间: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}
{'=' * 100}

"""
            self.file_handle.write(header)
            self.file_handle.flush()

    def _write_log_entry(self, entry_type: str, data: Dict[str, Any]) -> None:
        """
        写入日志条目

        Args:
            entry_type: 条目类型
            data: 条目数据
        """
        if not self.file_handle:
            return

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]
        with self.lock:
            log_entry = {"timestamp": timestamp, "type": entry_type, "data": to_jsonable(data)}
            try:
                json_str = json.dumps(log_entry, ensure_ascii=False, indent=2, default=str)
                self.file_handle.write(f"{json_str}\n")
                self.file_handle.write("-" * 100 + "\n\n")
                self.file_handle.flush()
            except (OSError, TypeError, ValueError) as e:
                print(f"⚠️  写入执行日志失败: {e}")

    def log_run_start(self, command: str, config: Dict[str, Any]) -> None:
        self._write_log_entry("RUN_START", {"command": command, "config": config, "run_id": self.run_id})

    def log_state_change(self, old_status: str, new_status: str, context: Optional[Dict[str, Any]] = None) -> None:
        self._write_log_entry("STATE_CHANGE", {
            "old_status": old_status,
            "new_status": new_status,
            "context": context or {},
        })

    def log_command_start(self, command: str, args: Dict[str, Any]) -> None:
        self._write_log_entry("COMMAND_START", {"command": command, "args": args})

    def log_command_result(
        self,
        command: str,
        result: Dict[str, Any],
        execution_time: Optional[float] = None,
    ) -> None:
        self._write_log_entry("COMMAND_RESULT", {
            "command": command,
            "success": result.get("success", False),
            "result": result.get("result"),
            "error": result.get("error"),
            "execution_time_seconds": execution_time,
        })

    def log_check_result(self, name: str, outcome: Dict[str, Any]) -> None:
        """记录一项随机游走对照检查"""
        self._write_log_entry("CHECK_RESULT", {"check": name, **outcome})

    def log_sweep_progress(self, label: str, done: int, total: int) -> None:
        self._write_log_entry("SWEEP_PROGRESS", {"label": label, "done": done, "total": total})

    def log_error(
        self,
        error_type: str,
        error_message: str,
        traceback_str: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
    ) -> None:
        self._write_log_entry("ERROR", {
            "error_type": error_type,
            "error_message": error_message,
            "traceback": traceback_str,
            "context": context or {},
        })

    def log_warning(self, message: str, context: Optional[Dict[str, Any]] = None) -> None:
        self._write_log_entry("WARNING", {"message": message, "context": context or {}})

    def log_run_complete(self, summary: Dict[str, Any]) -> None:
        """记录运行结束并关闭文件"""
        self._write_log_entry("RUN_COMPLETE", {"summary": summary})
        self.close()

    def close(self) -> None:
        if self.file_handle:
            try:
                footer = f"""
{'=' * 100}
执行日志结束时间: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}
{'=' * 100}
"""
                self.file_handle.write(footer)
                self.file_handle.close()
                print(f"✓ 执行日志已保存: {self.log_file}")
            except OSError as e:
                print(f"⚠️  关闭执行日志文件失败: {e}")
            finally:
                self.file_handle = None

    def get_log_path(self) -> Optional[str]:
        return str(self.log_file) if self.log_file else None
