"""
LieGauss 命令行界面
"""

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from core.commands import RunContext, auto_discover_commands, get_all_commands, get_command
from core.config import Settings, get_settings
from core.errors import ConfigError, LieGaussError
from core.execution_logger import ExecutionLogger
from core.export import EXPORT_FORMATS
from core.realtime_logger import RealtimeLogger
from core.state import RunState, RunStatus

# 命令行标志 -> 运行配置字段
FLAG_FIELDS = {
    "seed": "seed",
    "samples": "n_samples",
    "steps": "n_steps",
    "kmax": "k_max",
    "grid": "grid",
}


def load_run_config(path: Optional[str]) -> Dict[str, Any]:
    """
    读取运行配置文件（JSON，亦接受 YAML）

    Args:
        path: 文件路径，None 时返回空配置

    Raises:
        ConfigError: 文件不存在或无法解析
    """
    if not path:
        return {}
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"运行配置文件不存在: {path}", field="config")
    text = file_path.read_text(encoding="utf-8")
    try:
        if file_path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"运行配置文件 {path} 解析失败: {e}", field="config")
    if not isinstance(data, dict):
        raise ConfigError(f"运行配置文件 {path} 顶层必须是对象", field="config")
    return data


def build_parser(command_names: List[str]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liegauss",
        description="SU(2) 与 SU(2)⊗SU(2) 上的正规量子信道、关联误差与纠缠蒸馏",
    )
    parser.add_argument("--settings", help="全局 YAML 配置（默认 config.yaml 或 LIEGAUSS_CONFIG）")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in command_names:
        command = get_command(name)
        sub = subparsers.add_parser(name, help=command.description, description=command.description)
        sub.add_argument("--config", help="运行配置文件（JSON）")
        sub.add_argument("--out", help="输出文件路径")
        sub.add_argument("--seed", type=int, help="随机种子")
        sub.add_argument("--samples", type=int, help="随机游走样本数")
        sub.add_argument("--steps", type=int, help="随机游走步数")
        sub.add_argument("--kmax", type=int, help="最大对数分支序号")
        sub.add_argument("--grid", type=int, help="重心网格分辨率")
        sub.add_argument("--format", choices=EXPORT_FORMATS, default="csv", help="表格输出格式")
        sub.add_argument("--report", action="store_true", help="额外生成 Markdown 与 HTML 报告")
        sub.add_argument("--emit-config", action="store_true", help="只输出有效运行配置（JSON）后退出")
    return parser


class CLIInterface:
    """命令行界面类"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        # 确保命令已发现
        auto_discover_commands()

    def _create_state(self, command: str) -> RunState:
        state = RunState(command=command)
        runtime = self.settings.runtime
        if runtime.log_files:
            state.attach_loggers(
                RealtimeLogger(state.run_id, runtime.logs_dir),
                ExecutionLogger(state.run_id, runtime.logs_dir),
            )
        return state

    def execute(
        self,
        command_name: str,
        raw: Dict[str, Any],
        overrides: Dict[str, Any],
        out: Optional[str] = None,
        export_format: str = "csv",
        report: bool = False,
    ) -> Dict[str, Any]:
        """
        执行一次命令并记录运行状态

        Returns:
            命令结果字典 {"success", "result", "error"}
        """
        command = get_command(command_name)
        if command is None:
            return {"success": False, "result": None, "error": f"未知命令: {command_name}"}

        state = self._create_state(command_name)
        if state.execution_logger:
            state.execution_logger.log_run_start(command_name, {"raw": raw, "overrides": overrides})
        state.set_status(RunStatus.RUNNING)
        context = RunContext(
            settings=self.settings, out=out, export_format=export_format, report=report, state=state,
        )
        try:
            result = command.run(raw, context, overrides)
        except Exception as e:
            if state.execution_logger:
                state.execution_logger.log_error(type(e).__name__, str(e), traceback.format_exc())
            result = {"success": False, "result": None, "error": f"{type(e).__name__}: {e}"}

        state.set_status(RunStatus.COMPLETED if result.get("success") else RunStatus.FAILED)
        summary = state.get_summary()
        if state.execution_logger:
            state.execution_logger.log_run_complete(summary)
        if state.realtime_logger:
            state.realtime_logger.log_run_summary(summary)
            state.realtime_logger.close()
        result["run"] = summary
        return result

    def _display_result(self, result: Dict[str, Any]) -> None:
        if not result.get("success"):
            print(f"❌ 执行失败: {result.get('error')}")
            field = (result.get("details") or {}).get("details", {}).get("field")
            if field:
                print(f"   出错字段: {field}")
            return
        data = result.get("result") or {}
        print("✓ 执行成功")
        if "file_path" in data:
            print(f"  📄 输出文件: {data['file_path']}")
        if "export_info" in data:
            info = data["export_info"]
            print(f"  📄 输出文件: {info['file_path']} ({info['rows']} 行)")
        if "files" in data:
            for format_type, file_path in data["files"].items():
                print(f"  📄 {format_type.upper()}: {file_path}")

    def main(self, argv: Optional[List[str]] = None) -> int:
        """
        解析参数并执行

        Returns:
            退出码：0 表示全部计算成功，1 表示计算失败，2 表示配置错误
        """
        parser = build_parser(sorted(get_all_commands()))
        args = parser.parse_args(argv)
        overrides = {field: getattr(args, flag) for flag, field in FLAG_FIELDS.items()}

        try:
            raw = load_run_config(args.config)
        except LieGaussError as e:
            print(f"❌ 配置无效: {e.message}", file=sys.stderr)
            return 2

        if args.emit_config:
            command = get_command(args.command)
            try:
                config = command.parse_config(raw, overrides, self.settings)
            except LieGaussError as e:
                print(f"❌ 配置无效: {e.message}", file=sys.stderr)
                return 2
            print(config.to_json())
            return 0

        result = self.execute(args.command, raw, overrides, args.out, args.format, args.report)
        self._display_result(result)
        if not result.get("success"):
            details = result.get("details") or {}
            if details.get("error_type") in ("InvalidParameterError", "ConfigError"):
                return 2
            return 1
        return 0


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = list(sys.argv[1:] if argv is None else argv)
    settings_path = None
    if "--settings" in args:
        index = args.index("--settings")
        if index + 1 < len(args):
            settings_path = args[index + 1]
    try:
        settings = get_settings(settings_path)
    except ConfigError as e:
        print(f"❌ 全局配置无效: {e.message}", file=sys.stderr)
        return 2
    return CLIInterface(settings).main(args)


if __name__ == "__main__":
    sys.exit(main())
