"""
CSL噪声谱数值平台 - 时域模拟层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》langevin 模块

时域模拟层，提供：
1. 线性化涨落 SDE 的系数与稳态协方差
2. 可复现的多实现积分（Euler–Maruyama / Heun / 精确传播子）
3. Welch 功率谱估计与解析谱比较
"""

from .dynamics import (
    CHANNEL_NAMES,
    DriftAndNoise,
    discretize_exact,
    drift_and_noise,
    scaled_stationary_covariance,
    stationary_covariance,
)
from .psd import (
    ComparisonReport,
    analytic_on_grid,
    compare_psd,
    default_segment_length,
    ensemble_variance,
    estimate_psd,
    welch_psd,
)
from .simulator import IntegratorScheme, SimConfig, TraceEnsemble, simulate

__all__ = [
    "CHANNEL_NAMES",
    "DriftAndNoise",
    "discretize_exact",
    "drift_and_noise",
    "scaled_stationary_covariance",
    "stationary_covariance",
    "ComparisonReport",
    "analytic_on_grid",
    "compare_psd",
    "default_segment_length",
    "ensemble_variance",
    "estimate_psd",
    "welch_psd",
    "IntegratorScheme",
    "SimConfig",
    "TraceEnsemble",
    "simulate",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Linearized Langevin Monte-Carlo and spectral estimation"
