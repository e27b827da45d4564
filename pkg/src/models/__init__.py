"""
CSL噪声谱数值平台 - 物理模型层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》model 模块

物理模型层，提供：
1. 物理常数与坍缩参数预设
2. 原始输入、参数记录与 derive
3. 配置文件语法（YAML / --set 覆盖）
4. 线性化系统稳定性检查
"""

from .constants import CONSTANTS, GAMMA_ADLER, GAMMA_GRW, NAMED_GAMMAS, R_C_DEFAULT, PhysicalConstants, resolve_gamma
from .inputs import ConfigFile, apply_overrides, load_config_file, parse_config_dict, read_config_dict
from .stability import (
    StabilityReport,
    characteristic_polynomial,
    coupling_rate,
    physical_drift,
    require_stable,
    routh_hurwitz_stable,
    scaled_drift,
    scaling_vector,
    stability_check,
)
from .system import (
    BodyShape,
    CavityParams,
    CollapseBody,
    CollapseParams,
    DerivedQuantities,
    MirrorParams,
    RawInputs,
    SystemParams,
    derive,
    lambda_per_unit_gamma,
    with_changes,
    with_Lambda,
    with_lambda_rate,
    without_collapse,
)

__all__ = [
    "CONSTANTS",
    "GAMMA_ADLER",
    "GAMMA_GRW",
    "NAMED_GAMMAS",
    "R_C_DEFAULT",
    "PhysicalConstants",
    "resolve_gamma",
    "ConfigFile",
    "apply_overrides",
    "load_config_file",
    "parse_config_dict",
    "read_config_dict",
    "StabilityReport",
    "characteristic_polynomial",
    "coupling_rate",
    "physical_drift",
    "require_stable",
    "routh_hurwitz_stable",
    "scaled_drift",
    "scaling_vector",
    "stability_check",
    "BodyShape",
    "CavityParams",
    "CollapseBody",
    "CollapseParams",
    "DerivedQuantities",
    "MirrorParams",
    "RawInputs",
    "SystemParams",
    "derive",
    "lambda_per_unit_gamma",
    "with_changes",
    "with_Lambda",
    "with_lambda_rate",
    "without_collapse",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Physical parameters, derivation, config grammar and stability"
