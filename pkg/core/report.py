"""
报告生成模块
将验证结果整理为 Markdown，并转换为带样式的 HTML
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

import markdown

HTML_STYLE = """
        body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; line-height: 1.6; color: #333; margin: 0; padding: 20px; background-color: #f4f7f6; }
        .container { max-width: 960px; margin: 20px auto; background: #fff; padding: 30px; border-radius: 8px; box-shadow: 0 4px 12px rgba(0,0,0,0.08); }
        h1, h2, h3 { color: #2c3e50; margin-top: 1.5em; margin-bottom: 0.8em; }
        h1 { font-size: 2.0em; border-bottom: 2px solid #eee; padding-bottom: 10px; }
        h2 { font-size: 1.5em; border-bottom: 1px solid #eee; padding-bottom: 5px; }
        pre { background-color: #ecf0f1; border: 1px solid #ddd; border-left: 4px solid #3498db; padding: 15px; border-radius: 5px; overflow-x: auto; font-family: 'Consolas', 'Monaco', monospace; font-size: 0.9em; }
        code { font-family: 'Consolas', 'Monaco', monospace; background-color: #e0e0e0; padding: 2px 4px; border-radius: 3px; }
        table { width: 100%; border-collapse: collapse; margin-top: 1em; }
        th, td { border: 1px solid #ddd; padding: 8px; text-align: left; }
        th { background-color: #f0f0f0; font-weight: bold; }
        .footer { margin-top: 40px; padding-top: 20px; border-top: 1px solid #eee; text-align: center; font-size: 0.9em; color: #777; }
"""


def validation_markdown(report: Dict[str, Any], title: str = "随机游走验证报告") -> str:
    """
    验证报告的 Markdown 文本

    Args:
        report: validate 命令的结果（含 checks、passed、config）
        title: 标题

    Returns:
        Markdown 字符串
    """
    checks: List[Dict[str, Any]] = report.get("checks", [])
    n_passed = sum(1 for c in checks if c["passed"])
    verdict = "**全部通过**" if report.get("passed") else "**存在失败项**"

    lines = [
        f"# {title}",
        "",
        "## 执行摘要",
        "",
        f"共 {len(checks)} 项检查，通过 {n_passed} 项，{verdict}。",
        "",
        "## 检查结果",
        "",
        "| 检查 | 比特数 | 结果 | 最大偏差 | 最大 σ | z | 偏差/允许值 |",
        "| --- | --- | --- | --- | --- | --- | --- |",
    ]
    for c in checks:
        mark = "✓" if c["passed"] else "❌"
        lines.append(
            f"| {c['name']} | {c['n_qubits']} | {mark} | {c['max_deviation']:.3e} | "
            f"{c['max_sigma']:.3e} | {c['z']:.3f} | {c['worst_ratio']:.3f} |"
        )
    lines += [
        "",
        "## 运行配置",
        "",
        "```json",
        json.dumps(report.get("config", {}), ensure_ascii=False, indent=2),
        "```",
        "",
    ]
    return "\n".join(lines)


def markdown_to_html(md_content: str, title: str) -> str:
    """Markdown 转 HTML 并套用样式"""
    html_body = markdown.markdown(md_content, extensions=["fenced_code", "tables"])
    return f"""<!DOCTYPE html>
<html lang="zh-CN">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>{title}</title>
    <style>{HTML_STYLE}    </style>
</head>
<body>
    <div class="container">
        {html_body}
    </div>
    <div class="footer">
        <p>Generated by LieGauss on {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}</p>
    </div>
</body>
</html>
"""


def save_report(md_content: str, base_path, title: str) -> Dict[str, str]:
    """
    保存 Markdown 与 HTML 两种格式

    Returns:
        {"markdown": 路径, "html": 路径}
    """
    base_path = Path(base_path)
    base_path.parent.mkdir(parents=True, exist_ok=True)
    md_file = base_path.with_suffix(".md")
    html_file = base_path.with_suffix(".html")
    md_file.write_text(md_content, encoding="utf-8")
    html_file.write_text(markdown_to_html(md_content, title), encoding="utf-8")
    return {"markdown": str(md_file), "html": str(html_file)}
