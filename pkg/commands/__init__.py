"""
命令模块
每个模块通过 @register_command 注册，由 auto_discover_commands 导入
"""

from pathlib import Path

from core.commands import RunContext


def resolve_output(context: RunContext, command: str, extension: str) -> Path:
    """输出路径：--out 优先，后缀按输出格式修正"""
    return context.output_path(f"{command}.{extension}").with_suffix(f".{extension}")
