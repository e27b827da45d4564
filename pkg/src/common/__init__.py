"""
CSL噪声谱数值平台 - 公共层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》common 模块

公共层模块，提供：
1. 数据契约（谱结构、枚举、指纹）
2. 统一异常体系与退出码
3. 数值默认值与运行时设置
4. 环境检查与日志初始化
"""

from .contracts import (
    AccuracyError,
    ConfigError,
    CslSpectraError,
    DivergenceError,
    EmptyBandError,
    GridSpecError,
    NoiseModel,
    PaddingError,
    ParameterValidationError,
    QuadratureError,
    SimConfigError,
    Spectrum,
    SpectrumEvaluationError,
    SpectrumKind,
    StabilityError,
    ToleranceError,
    fingerprint_of,
)

__all__ = [
    "AccuracyError",
    "ConfigError",
    "CslSpectraError",
    "DivergenceError",
    "EmptyBandError",
    "GridSpecError",
    "NoiseModel",
    "PaddingError",
    "ParameterValidationError",
    "QuadratureError",
    "SimConfigError",
    "Spectrum",
    "SpectrumEvaluationError",
    "SpectrumKind",
    "StabilityError",
    "ToleranceError",
    "fingerprint_of",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Shared contracts, errors, configuration and environment helpers"
