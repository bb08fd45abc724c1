"""
实时日志记录器
"""

import os
import threading
from datetime import datetime
from pathlib import Path
from typing import Optional


class RealtimeLogger:
    """逐行可读日志"""

    def __init__(self, run_id: str, logs_dir: str = "logs"):
        self.run_id = run_id
        self.logs_dir = logs_dir
        self.log_file: Optional[Path] = None
        self.file_handle = None
        self.lock = threading.Lock()
        self._initialize_log_file()

    def _initialize_log_file(self) -> None:
        os.makedirs(self.logs_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file = Path(self.logs_dir) / f"realtime_{self.run_id[:8]}_{timestamp}.log"
        try:
            self.file_handle = open(self.log_file, "a", encoding="utf-8")
            self.file_handle.write(
                f"\n{'=' * 80}\nLieGauss 实时日志\n运行 ID: {self.run_id}\n"
                f"开始时间: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n{'=' * 80}\n\n"
            )
            self.file_handle.flush()
        except OSError as e:
            print(f"⚠️  无法创建实时日志文件: {e}")
            self.file_handle = None

    def log(self, level: str, message: str, details: Optional[dict] = None) -> None:
        """
        写入日志

        Args:
            level: 日志级别
            message: 日志消息
            details: 详细信息，逐行缩进输出
        """
        if not self.file_handle:
            return

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        with self.lock:
            log_line = f"[{timestamp}] [{level}] {message}\n"
            if details:
                log_line += "\n".join(f"  {k}: {v}" for k, v in details.items()) + "\n"
            log_line += "\n"
            try:
                self.file_handle.write(log_line)
                self.file_handle.flush()
            except OSError as e:
                print(f"⚠️  写入日志失败: {e}")

    def log_status_change(self, old_status: str, new_status: str) -> None:
        self.log("INFO", f"状态变化: {old_status} -> {new_status}")

    def log_command(self, command: str, args: dict, result: dict) -> None:
        self.log("INFO", f"命令执行: {command}", {
            "参数": str(args),
            "成功": result.get("success", False),
            "错误": result.get("error") or "N/A",
        })

    def log_step(self, step_id: int, description: str, status: str) -> None:
        self.log("INFO", f"步骤 {step_id}: {description}", {"状态": status})

    def log_check(self, name: str, passed: bool, worst_ratio: float) -> None:
        self.log("INFO" if passed else "ERROR", f"检查 {name}: {'通过' if passed else '失败'}", {
            "最大偏差/允许值": f"{worst_ratio:.3f}",
        })

    def log_progress(self, label: str, done: int, total: int) -> None:
        self.log("INFO", f"{label}: {done}/{total}")

    def log_run_summary(self, summary: dict) -> None:
        """运行摘要：状态、输出文件与各步骤耗时"""
        details = {"状态": summary.get("status"), "步骤数": summary.get("steps_count", 0)}
        if summary.get("failed_steps"):
            details["失败步骤"] = ", ".join(summary["failed_steps"])
        if summary.get("outputs"):
            details["输出"] = ", ".join(summary["outputs"])
        for name, seconds in summary.get("timings", {}).items():
            details[f"耗时 {name}"] = f"{seconds:.3f}s"
        self.log("INFO" if summary.get("status") == "completed" else "ERROR",
                 f"运行结束: {summary.get('command')}", details)

    def log_warning(self, message: str) -> None:
        self.log("WARNING", message)

    def log_error(self, message: str, error: Optional[Exception] = None) -> None:
        self.log("ERROR", message, {"错误": str(error)} if error else None)

    def close(self) -> None:
        if self.file_handle:
            try:
                self.file_handle.write(
                    f"\n{'=' * 80}\n实时日志结束时间: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n{'=' * 80}\n"
                )
                self.file_handle.close()
                print(f"✓ 实时日志已保存: {self.log_file}")
            except OSError as e:
                print(f"⚠️  关闭实时日志文件失败: {e}")
            finally:
                self.file_handle = None

    def get_log_path(self) -> Optional[str]:
        return str(self.log_file) if self.log_file else None
