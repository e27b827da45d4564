"""
CSL噪声谱数值平台 - 系统参数模型

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》model 模块

功能列表：
1. 原始输入 RawInputs（SI / rad/s 单位）
2. 镜面、腔、坍缩参数记录及其不变量校验
3. derive：由原始输入计算 χ、ℰ、α_s、β、λ、Λ
4. 参数变更（扫描、--no-csl 配对运行）始终重新 derive
5. 参数指纹（完整 / 不含坍缩输入）
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Tuple

from common.contracts import ParameterValidationError, fingerprint_of

from .constants import CONSTANTS, DEFAULT_BODY_EDGE, DEFAULT_WAVELENGTH, R_C_DEFAULT, PhysicalConstants


# =============================================================================
# 1. 校验工具
# =============================================================================


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0:
        raise ParameterValidationError(name, value, "必须为有限正数")


def _require_non_negative(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise ParameterValidationError(name, value, "必须为有限非负数")


# =============================================================================
# 2. 坍缩体几何
# =============================================================================


class BodyShape(str, Enum):
    SPHERE = "sphere"
    CUBOID = "cuboid"


@dataclass(frozen=True)
class CollapseBody:
    """坍缩速率计算所用的刚体形状，质量取镜面质量"""

    shape: BodyShape  # 形状
    dimensions: Tuple[float, ...]  # 球: (R,)；长方体: (a, b, c)，单位 m

    def __post_init__(self):
        expected = 1 if self.shape == BodyShape.SPHERE else 3
        if len(self.dimensions) != expected:
            raise ParameterValidationError(
                "collapse.body", self.dimensions, f"{self.shape.value} 需要 {expected} 个尺寸"
            )
        for i, d in enumerate(self.dimensions):
            _require_positive(f"collapse.body.dimensions[{i}]", d)

    @classmethod
    def cube(cls, edge: float = DEFAULT_BODY_EDGE) -> "CollapseBody":
        return cls(BodyShape.CUBOID, (edge, edge, edge))

    @classmethod
    def cuboid(cls, a: float, b: float, c: float) -> "CollapseBody":
        return cls(BodyShape.CUBOID, (a, b, c))

    @classmethod
    def sphere(cls, radius: float) -> "CollapseBody":
        return cls(BodyShape.SPHERE, (radius,))


# =============================================================================
# 3. 原始输入
# =============================================================================


@dataclass(frozen=True)
class RawInputs:
    """全部物理输入，频率类量单位 rad/s"""

    mass: float  # kg
    omega_m: float  # rad/s
    gamma_m: float  # rad/s，能量阻尼率
    temperature: float  # K
    length: float  # m
    kappa: float  # rad/s
    power: float  # W
    detuning: float  # rad/s
    gamma_csl: float  # m³/s
    r_c: float = R_C_DEFAULT  # m
    wavelength: float = DEFAULT_WAVELENGTH  # m
    body: CollapseBody = field(default_factory=CollapseBody.cube)

    def to_config(self) -> Dict[str, Any]:
        """导出为配置文件语法（rad/s 键），用于指纹与元数据"""
        body: Dict[str, Any] = {"shape": self.body.shape.value}
        if self.body.shape == BodyShape.SPHERE:
            body["radius_m"] = self.body.dimensions[0]
        else:
            body.update(zip(("a_m", "b_m", "c_m"), self.body.dimensions))
        return {
            "mirror": {
                "mass_kg": self.mass,
                "omega_m_rad_per_s": self.omega_m,
                "gamma_m_rad_per_s": self.gamma_m,
                "temperature_k": self.temperature,
            },
            "cavity": {
                "length_m": self.length,
                "kappa_rad_per_s": self.kappa,
                "wavelength_m": self.wavelength,
                "power_w": self.power,
                "detuning_rad_per_s": self.detuning,
            },
            "collapse": {
                "gamma_csl_m3_per_s": self.gamma_csl,
                "r_c_m": self.r_c,
                "body": body,
            },
        }


# =============================================================================
# 4. 参数记录
# =============================================================================


@dataclass(frozen=True)
class MirrorParams:
    """机械镜面参数"""

    mass: float  # kg
    omega_m: float  # rad/s
    gamma_m: float  # rad/s
    temperature: float  # K

    def __post_init__(self):
        _require_positive("mirror.mass", self.mass)
        _require_positive("mirror.omega_m", self.omega_m)
        _require_positive("mirror.gamma_m", self.gamma_m)
        _require_positive("mirror.temperature", self.temperature)
        if self.omega_m / self.gamma_m < 1.0:
            raise ParameterValidationError(
                "mirror.gamma_m", self.gamma_m, "品质因数 ω_m/γ_m < 1（过阻尼输入不受支持）"
            )

    @property
    def quality_factor(self) -> float:
        return self.omega_m / self.gamma_m


@dataclass(frozen=True)
class CavityParams:
    """光学腔与泵浦参数"""

    length: float  # m
    kappa: float  # rad/s
    wavelength: float  # m
    power: float  # W，允许 0（无驱动）
    detuning: float  # rad/s

    def __post_init__(self):
        _require_positive("cavity.length", self.length)
        _require_positive("cavity.kappa", self.kappa)
        _require_positive("cavity.wavelength", self.wavelength)
        _require_non_negative("cavity.power", self.power)
        if not math.isfinite(self.detuning):
            raise ParameterValidationError("cavity.detuning", self.detuning, "必须为有限数")


@dataclass(frozen=True)
class CollapseParams:
    """CSL 坍缩参数；lambda_rate 与 Lambda 为派生量"""

    gamma_csl: float  # m³/s
    r_c: float  # m
    body: CollapseBody
    lambda_rate: float  # m⁻²·s⁻¹
    Lambda: float  # rad/s

    def __post_init__(self):
        _require_non_negative("collapse.gamma_csl", self.gamma_csl)
        _require_positive("collapse.r_c", self.r_c)


@dataclass(frozen=True)
class DerivedQuantities:
    """派生量"""

    omega_c: float  # rad/s，腔（泵浦）角频率 2πc/λ_opt
    chi: float  # rad/(s·m)，光力耦合率 ω_c/L
    E_pump: float  # s⁻¹，ℰ = sqrt(2κP/ħω_0)
    alpha_s: float  # 稳态腔内振幅（取实正）
    beta: float  # s/rad，β = ħ/(2k_B T)


@dataclass(frozen=True)
class SystemParams:
    """全部物理参数与派生量；只能经由 derive 构造"""

    inputs: RawInputs
    mirror: MirrorParams
    cavity: CavityParams
    collapse: CollapseParams
    derived: DerivedQuantities
    constants: PhysicalConstants = CONSTANTS

    @property
    def x_zpf(self) -> float:
        """位置标度 sqrt(ħ/(mω_m))"""
        return math.sqrt(self.constants.hbar / (self.mirror.mass * self.mirror.omega_m))

    @property
    def p_zpf(self) -> float:
        """动量标度 sqrt(ħmω_m)"""
        return math.sqrt(self.constants.hbar * self.mirror.mass * self.mirror.omega_m)

    @property
    def fingerprint(self) -> str:
        return fingerprint_of(self.inputs.to_config())

    @property
    def base_fingerprint(self) -> str:
        """不含坍缩输入的指纹：--no-csl 配对运行共享该值"""
        payload = self.inputs.to_config()
        payload.pop("collapse")
        return fingerprint_of(payload)


# =============================================================================
# 5. 派生与变更
# =============================================================================


def derive(inputs: RawInputs) -> SystemParams:
    """由原始输入构造 SystemParams（纯函数，幂等）"""
    # 延迟导入，geometry 依赖 models.constants
    from geometry.closed_forms import lambda_for_body

    const = CONSTANTS
    mirror = MirrorParams(inputs.mass, inputs.omega_m, inputs.gamma_m, inputs.temperature)
    cavity = CavityParams(
        inputs.length, inputs.kappa, inputs.wavelength, inputs.power, inputs.detuning
    )
    _require_non_negative("collapse.gamma_csl", inputs.gamma_csl)
    _require_positive("collapse.r_c", inputs.r_c)

    omega_c = 2.0 * math.pi * const.c / cavity.wavelength
    chi = omega_c / cavity.length
    E_pump = math.sqrt(2.0 * cavity.kappa * cavity.power / (const.hbar * omega_c))
    alpha_s = E_pump / math.sqrt(cavity.kappa**2 + cavity.detuning**2)
    beta = const.hbar / (2.0 * const.k_B * mirror.temperature)

    lambda_rate = lambda_for_body(
        inputs.body, mirror.mass, inputs.gamma_csl, inputs.r_c
    ).lambda_rate
    Lambda = lambda_rate * const.hbar / (mirror.mass * mirror.omega_m)

    collapse = CollapseParams(inputs.gamma_csl, inputs.r_c, inputs.body, lambda_rate, Lambda)
    derived = DerivedQuantities(omega_c, chi, E_pump, alpha_s, beta)
    return SystemParams(inputs, mirror, cavity, collapse, derived, const)


def with_changes(params: SystemParams, **changes: Any) -> SystemParams:
    """修改原始输入并重新 derive"""
    return derive(replace(params.inputs, **changes))


def without_collapse(params: SystemParams) -> SystemParams:
    """γ=0 的配对参数（Λ=0，其余输入不变）"""
    return with_changes(params, gamma_csl=0.0)


def lambda_per_unit_gamma(params: SystemParams) -> float:
    """γ = 1 m³/s 时的 Λ；λ 对 γ 线性"""
    return with_changes(params, gamma_csl=1.0).collapse.Lambda


def with_Lambda(params: SystemParams, Lambda: float) -> SystemParams:
    """按目标 Λ (rad/s) 反推 γ"""
    _require_non_negative("collapse.Lambda", Lambda)
    return with_changes(params, gamma_csl=Lambda / lambda_per_unit_gamma(params))


def with_lambda_rate(params: SystemParams, lambda_rate: float) -> SystemParams:
    """按目标 λ (m⁻²s⁻¹) 反推 γ"""
    _require_non_negative("collapse.lambda_rate", lambda_rate)
    unit = with_changes(params, gamma_csl=1.0).collapse.lambda_rate
    return with_changes(params, gamma_csl=lambda_rate / unit)
