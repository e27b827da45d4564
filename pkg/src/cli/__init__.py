"""
CSL噪声谱数值平台 - 命令行层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》cli 模块

命令行层，提供：
1. 子命令实现（lambda / spectrum / area-ratio / sweep / simulate / presets）
2. 参数预设注册表
3. CSV、运行元数据与 gnuplot 脚本输出
"""

from .commands import (
    COMMANDS,
    RunConfig,
    build_run_config,
    choose_scheme,
    cmd_area_ratio,
    cmd_lambda,
    cmd_presets,
    cmd_simulate,
    cmd_spectrum,
    cmd_sweep,
    load_parameters,
)
from .output import RunRecord, emit_frame, metadata_path, read_metadata, write_metadata, write_plot_script
from .presets import Preset, PresetRegistry

__all__ = [
    "COMMANDS",
    "RunConfig",
    "build_run_config",
    "choose_scheme",
    "cmd_area_ratio",
    "cmd_lambda",
    "cmd_presets",
    "cmd_simulate",
    "cmd_spectrum",
    "cmd_sweep",
    "load_parameters",
    "RunRecord",
    "emit_frame",
    "metadata_path",
    "read_metadata",
    "write_metadata",
    "write_plot_script",
    "Preset",
    "PresetRegistry",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Batch command-line front end: presets, commands and writers"
