"""
CSL噪声谱数值平台 - 结果输出

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》cli 模块

功能列表：
1. CSV 写出（polars，无输出路径时写到标准输出）
2. 运行元数据 <output>.meta.json（指纹、命令、参数、退出状态、耗时）
3. 可选 gnuplot 绘图脚本
"""

import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import polars as pl

from common.config import get_section

logger = logging.getLogger(__name__)


def _suffix(key: str, default: str) -> str:
    return get_section("output").get(key, default)


def metadata_path(output: Path) -> Path:
    return output.with_name(output.name + _suffix("metadata_suffix", ".meta.json"))


def plot_script_path(output: Path) -> Path:
    return output.with_name(output.stem + _suffix("plot_suffix", ".gp"))


def emit_frame(frame: pl.DataFrame, output: Optional[Path]) -> Optional[Path]:
    """写出 CSV；output 为空时写到 stdout"""
    if output is None:
        sys.stdout.write(frame.write_csv())
        sys.stdout.flush()
        return None
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    frame.write_csv(output)
    logger.info(f"结果已写出: {output} ({frame.height} 行)")
    return output


# =============================================================================
# 运行元数据
# =============================================================================


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return str(value)


@dataclass
class RunRecord:
    """一次命令运行的元数据"""

    command: str
    flags: Dict[str, Any]
    params_fingerprint: str = ""
    base_fingerprint: str = ""
    params: Dict[str, Any] = field(default_factory=dict)  # 原始输入（rad/s 语法）
    derived: Dict[str, Any] = field(default_factory=dict)  # α_s、Λ 等派生量
    results: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)  # 秒
    exit_status: int = 0
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self) -> Dict[str, Any]:
        return _jsonable(asdict(self))


def write_metadata(record: RunRecord, output: Path) -> Path:
    path = metadata_path(Path(output))
    with path.open("w", encoding="utf-8") as f:
        json.dump(record.to_dict(), f, indent=2, ensure_ascii=False, sort_keys=True)
        f.write("\n")
    logger.debug(f"元数据已写出: {path}")
    return path


def read_metadata(output: Path) -> Dict[str, Any]:
    with metadata_path(Path(output)).open("r", encoding="utf-8") as f:
        return json.load(f)


# =============================================================================
# gnuplot 脚本
# =============================================================================


def write_plot_script(
    csv_path: Path,
    x_column: str,
    y_columns: Sequence[str],
    columns: Sequence[str],
    xlabel: str,
    ylabel: str,
    logscale_y: bool = False,
) -> Path:
    """为 CSV 生成 gnuplot 脚本（列按名称定位）"""
    csv_path = Path(csv_path)
    script = plot_script_path(csv_path)
    index = {name: i + 1 for i, name in enumerate(columns)}
    lines: List[str] = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if logscale_y:
        lines.append("set logscale y")
    plots = [f"'{csv_path.name}' using {index[x_column]}:{index[y]} with lines" for y in y_columns]
    lines.append("plot " + ", \\\n     ".join(plots))
    script.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"绘图脚本已写出: {script}")
    return script
