"""
CSL噪声谱数值平台 - 频域谱层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》spectrum 模块

频域谱层，提供：
1. 位移噪声谱与输出正交分量谱
2. 频率网格与向量化谱计算
3. 谱面积比与解析方差
4. 参数扫描
"""

from .area import AreaRatioResult, QuadratureConfig, analytic_variance, area_ratio
from .density import (
    GridSpec,
    SpectrumKernel,
    dns_output,
    dns_peak_limit,
    dns_point,
    find_peak,
    omega_coth,
    peak_value,
    spectrum_grid,
)
from .sweep import SWEEP_PARAMETERS, SweepRow, SweepSpec, SweepTable, sweep

__all__ = [
    "AreaRatioResult",
    "QuadratureConfig",
    "analytic_variance",
    "area_ratio",
    "GridSpec",
    "SpectrumKernel",
    "dns_output",
    "dns_peak_limit",
    "dns_point",
    "find_peak",
    "omega_coth",
    "peak_value",
    "spectrum_grid",
    "SWEEP_PARAMETERS",
    "SweepRow",
    "SweepSpec",
    "SweepTable",
    "sweep",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Analytic displacement and output noise spectra, areas and sweeps"
