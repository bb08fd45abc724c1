"""
命令基类和注册机制
每个命令声明一个 Pydantic 运行配置模型，执行结果统一为 {"success", "result", "error"}
"""

import importlib
import time
import traceback
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.config import Settings, get_settings
from core.errors import InvalidParameterError, LieGaussError
from core.state import RunState

# 命令注册表
_command_registry: Dict[str, Type["BaseCommand"]] = {}


def register_command(command_class: Type) -> Type:
    """
    命令注册装饰器

    Args:
        command_class: 命令类

    Returns:
        命令类
    """
    if not issubclass(command_class, BaseCommand):
        raise ValueError(f"{command_class.__name__} 必须继承自 BaseCommand")

    command_name = command_class.name
    if not command_name:
        raise ValueError(f"{command_class.__name__} 未设置 name")
    if command_name in _command_registry and _command_registry[command_name] is not command_class:
        raise ValueError(f"命令 {command_name} 已注册")

    _command_registry[command_name] = command_class
    return command_class


def get_command(command_name: str) -> Optional["BaseCommand"]:
    """获取命令实例，未注册时返回 None"""
    if command_name not in _command_registry:
        return None
    return _command_registry[command_name]()


def get_all_commands() -> Dict[str, Type["BaseCommand"]]:
    return _command_registry.copy()


class RunConfig(BaseModel):
    """运行配置基类：未知字段报错，支持 JSON 往返"""
    model_config = ConfigDict(extra="forbid")

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.model_validate_json(text)


class CommandParameter(BaseModel):
    """命令参数描述"""
    name: str
    type: str
    description: str
    required: bool = True
    default: Any = None


class CommandSchema(BaseModel):
    name: str
    description: str
    parameters: List[CommandParameter]


class RunContext(BaseModel):
    """命令执行上下文：配置、输出位置与运行状态"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    settings: Settings = Field(default_factory=get_settings)
    out: Optional[str] = None
    export_format: str = "csv"
    report: bool = False
    state: Optional[RunState] = None

    def output_path(self, default_name: str) -> Path:
        """--out 优先，否则写到 runtime.output_dir"""
        if self.out:
            return Path(self.out)
        return Path(self.settings.runtime.output_dir) / default_name

    def progress(self, label: str):
        """返回扫描进度回调 (done, total)"""
        state = self.state

        def _on_done(done: int, total: int) -> None:
            if state is not None and (done == total or done % max(1, total // 10) == 0):
                state.log_progress(label, done, total)

        return _on_done


def validation_field(exc: ValidationError) -> str:
    """ValidationError 中第一个出错字段的点分路径"""
    errors = exc.errors()
    if not errors:
        return ""
    return ".".join(str(part) for part in errors[0].get("loc", ()))


class BaseCommand(ABC):
    """命令基类"""

    name: str = ""
    description: str = ""
    config_model: Type[RunConfig] = RunConfig

    def default_config(self, settings: Settings) -> Dict[str, Any]:
        """从 config.yaml 对应段落取默认值，子类按需覆盖"""
        return {}

    def parse_config(
        self,
        raw: Optional[Dict[str, Any]] = None,
        overrides: Optional[Dict[str, Any]] = None,
        settings: Optional[Settings] = None,
    ) -> RunConfig:
        """
        合并默认值、配置文件与命令行覆盖项并校验

        Args:
            raw: 配置文件内容
            overrides: 命令行覆盖项（值为 None 的项忽略，不属于本命令的项忽略）
            settings: 全局配置

        Returns:
            校验后的运行配置

        Raises:
            InvalidParameterError: 字段缺失、类型错误或不满足物理约束
        """
        settings = settings or get_settings()
        merged = dict(self.default_config(settings))
        merged.update(raw or {})
        fields = self.config_model.model_fields
        for key, value in (overrides or {}).items():
            if value is not None and key in fields:
                merged[key] = value
        try:
            return self.config_model.model_validate(merged)
        except ValidationError as e:
            field = validation_field(e)
            message = e.errors()[0].get("msg", "无效") if e.errors() else str(e)
            raise InvalidParameterError(field or "config", message)

    @abstractmethod
    def execute(self, config: RunConfig, context: RunContext) -> Dict[str, Any]:
        """
        执行命令

        Args:
            config: 已校验的运行配置
            context: 执行上下文

        Returns:
            执行结果字典，必须包含 'success' 字段
        """
        pass

    def run(
        self,
        raw: Optional[Dict[str, Any]] = None,
        context: Optional[RunContext] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """
        校验配置并执行，库内异常转换为失败结果

        Returns:
            {"success": bool, "result": Any, "error": str | None}
        """
        context = context or RunContext()
        state = context.state
        logger = state.execution_logger if state else None
        started = time.perf_counter()
        try:
            config = self.parse_config(raw, overrides, context.settings)
        except LieGaussError as e:
            result = {"success": False, "result": None, "error": e.message, "details": e.to_dict()}
            if logger:
                logger.log_error(type(e).__name__, e.message, context={"command": self.name})
            return result

        if state is not None:
            state.config = config.model_dump(mode="json")
        if logger:
            logger.log_command_start(self.name, config.model_dump(mode="json"))

        try:
            result = self.execute(config, context)
        except LieGaussError as e:
            result = {"success": False, "result": None, "error": e.message, "details": e.to_dict()}
            if logger:
                logger.log_error(type(e).__name__, e.message, traceback.format_exc(), {"command": self.name})
        except (ValueError, OSError) as e:
            result = {"success": False, "result": None, "error": f"{type(e).__name__}: {e}"}
            if logger:
                logger.log_error(type(e).__name__, str(e), traceback.format_exc(), {"command": self.name})

        if logger:
            logger.log_command_result(self.name, result, time.perf_counter() - started)
        if state is not None and state.realtime_logger:
            state.realtime_logger.log_command(self.name, config.model_dump(mode="json"), result)
        return result

    def get_schema(self) -> CommandSchema:
        """从运行配置模型提取参数描述"""
        parameters = []
        for field_name, info in self.config_model.model_fields.items():
            annotation = info.annotation
            param_type = "object"
            if annotation is int:
                param_type = "integer"
            elif annotation is float:
                param_type = "number"
            elif annotation is bool:
                param_type = "boolean"
            elif annotation is str:
                param_type = "string"
            elif getattr(annotation, "__origin__", None) is list:
                param_type = "array"
            required = info.is_required()
            parameters.append(CommandParameter(
                name=field_name,
                type=param_type,
                description=info.description or "",
                required=required,
                default=None if required else info.get_default(call_default_factory=True),
            ))
        return CommandSchema(name=self.name, description=self.description, parameters=parameters)


def get_command_schemas() -> List[Dict[str, Any]]:
    """全部命令的参数描述"""
    return [command_class().get_schema().model_dump() for command_class in _command_registry.values()]


def auto_discover_commands(commands_dir: str = "commands") -> None:
    """
    自动发现并注册命令

    Args:
        commands_dir: 命令目录（相对项目根目录）
    """
    commands_path = Path(commands_dir)
    if not commands_path.is_absolute():
        commands_path = Path(__file__).resolve().parent.parent / commands_dir
    if not commands_path.exists():
        return

    for file_path in sorted(commands_path.glob("*.py")):
        if file_path.name == "__init__.py":
            continue
        module_name = file_path.stem
        try:
            # 导入时执行 @register_command
            importlib.import_module(f"{commands_path.name}.{module_name}")
        except ImportError as e:
            print(f"⚠️ 导入命令模块 {module_name} 失败: {e}")
