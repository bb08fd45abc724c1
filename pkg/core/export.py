"""
结果导出模块
CSV / JSON / XLSX，文件头嵌入版本、命令、种子与完整的有效配置
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from core import __version__
from core.execution_logger import to_jsonable

FLOAT_FORMAT = "%.17g"
EXPORT_FORMATS = ("csv", "json", "xlsx")


def build_metadata(command: str, config: Dict[str, Any], seed: Optional[int] = None, **extra) -> Dict[str, Any]:
    """
    输出文件的元数据块（不含时间戳，保证重跑时字节一致）

    Args:
        command: 命令名
        config: 有效配置
        seed: 随机种子
        **extra: 额外字段（如选定的电路约定）

    Returns:
        有序字典
    """
    metadata = {"tool": "liegauss", "version": __version__, "command": command, "seed": seed}
    metadata.update(to_jsonable(extra))
    metadata["config"] = to_jsonable(config)
    return metadata


def _prepare_path(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(df: pd.DataFrame, path, metadata: Dict[str, Any]) -> Path:
    """
    写 CSV：先写 # 开头的元数据行，再写表头与数据（17 位有效数字）

    Returns:
        写入的路径
    """
    path = _prepare_path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in metadata.items():
            f.write(f"# {key}: {json.dumps(value, ensure_ascii=False, sort_keys=True)}\n")
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_csv(path) -> pd.DataFrame:
    """读取 write_csv 的输出（跳过元数据行）"""
    with open(path, "r", encoding="utf-8") as f:
        skip = 0
        for line in f:
            if not line.startswith("#"):
                break
            skip += 1
    return pd.read_csv(path, skiprows=skip, keep_default_na=True)


def read_csv_metadata(path) -> Dict[str, Any]:
    """解析 CSV 头部的元数据行"""
    metadata: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            try:
                metadata[key] = json.loads(value)
            except json.JSONDecodeError:
                metadata[key] = value
    return metadata


def write_json(payload: Dict[str, Any], path, metadata: Dict[str, Any]) -> Path:
    """JSON 输出：{"metadata": ..., "result": ...}"""
    path = _prepare_path(path)
    document = {"metadata": metadata, "result": to_jsonable(payload)}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, ensure_ascii=False, indent=2)
        f.write("\n")
    return path


def write_xlsx(df: pd.DataFrame, path, metadata: Dict[str, Any]) -> Path:
    """Excel 输出：数据表 + 元数据表"""
    path = _prepare_path(path)
    meta_df = pd.DataFrame(
        [(k, json.dumps(v, ensure_ascii=False, sort_keys=True) if isinstance(v, (dict, list)) else v)
         for k, v in metadata.items()],
        columns=["key", "value"],
    )
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        df.to_excel(writer, sheet_name="data", index=False)
        meta_df.to_excel(writer, sheet_name="metadata", index=False)
    return path


def export_table(df: pd.DataFrame, path, metadata: Dict[str, Any], export_format: str = "csv") -> Dict[str, Any]:
    """
    按格式导出表格

    Args:
        df: 结果表
        path: 输出路径（后缀按格式修正）
        metadata: 元数据块
        export_format: csv / json / xlsx

    Returns:
        导出信息 {"format", "file_path", "rows", "columns"}
    """
    if export_format not in EXPORT_FORMATS:
        raise ValueError(f"不支持的导出格式: {export_format}")
    path = Path(path).with_suffix(f".{export_format}")
    if export_format == "csv":
        written = write_csv(df, path, metadata)
    elif export_format == "json":
        records = df.astype(object).where(pd.notna(df), None).to_dict("records")
        written = write_json({"columns": list(df.columns), "rows": records}, path, metadata)
    else:
        written = write_xlsx(df, path, metadata)
    return {"format": export_format, "file_path": str(written), "rows": len(df), "columns": list(df.columns)}
