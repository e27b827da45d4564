"""
CSL噪声谱数值平台 - 坍缩速率闭式解

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》geometry 模块

功能列表：
1. LambdaMethod / LambdaResult 结果契约
2. 均匀球体：公开闭式 lambda_sphere 与精确闭式 lambda_sphere_exact
3. 球体径向（傅里叶空间）积分 radial_lambda_sphere，作为精确闭式的独立校验
4. 均匀长方体分离变量闭式 lambda_cuboid
5. lambda_for_body：按坍缩体形状分派
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, special

from common.contracts import ParameterValidationError
from models.constants import CONSTANTS
from models.system import BodyShape, CollapseBody


class LambdaMethod(str, Enum):
    """λ 的计算方法"""

    CLOSED_FORM_SPHERE = "closed_form_sphere"
    CLOSED_FORM_SPHERE_EXACT = "closed_form_sphere_exact"
    RADIAL_QUADRATURE_SPHERE = "radial_quadrature_sphere"
    CLOSED_FORM_CUBOID = "closed_form_cuboid"
    VOXEL_DIRECT = "voxel_direct"
    VOXEL_CONVOLUTION = "voxel_convolution"


@dataclass(frozen=True)
class LambdaResult:
    """坍缩速率计算结果"""

    lambda_rate: float  # m⁻²·s⁻¹
    method: LambdaMethod  # 计算方法
    est_rel_error: float  # 估计相对误差
    axis_rates: Optional[Tuple[float, float, float]] = None  # (λ_x, λ_y, λ_z)，λ 为其均值

    def __post_init__(self):
        if not self.lambda_rate >= 0:
            raise ParameterValidationError("lambda_rate", self.lambda_rate, "必须非负")

    def Lambda(self, mass: float, omega_m: float) -> float:
        """Λ = λħ/(mω_m)，单位 rad/s"""
        return self.lambda_rate * CONSTANTS.hbar / (mass * omega_m)


def _validate(gamma_csl: float, r_c: float, mass: float) -> None:
    if not math.isfinite(gamma_csl) or gamma_csl < 0:
        raise ParameterValidationError("gamma_csl", gamma_csl, "必须为有限非负数")
    for name, value in (("r_c", r_c), ("mass", mass)):
        if not math.isfinite(value) or value <= 0:
            raise ParameterValidationError(name, value, "必须为有限正数")


def _sphere_prefactor(radius: float, mass: float, gamma_csl: float, r_c: float) -> float:
    m0 = CONSTANTS.amu
    return 3.0 * gamma_csl * mass**2 / (8.0 * math.pi**1.5 * m0**2 * r_c * radius**4)


# =============================================================================
# 1. 均匀球体
# =============================================================================


def lambda_sphere_exact(radius: float, mass: float, gamma_csl: float, r_c: float) -> LambdaResult:
    """均匀球体 λ 的精确闭式

    λ = 3γm²/(8π^{3/2} m₀² r_C R⁴)·[1 − 2r_C²/R² + (1 + 2r_C²/R²)e^{−R²/r_C²}]
    """
    _validate(gamma_csl, r_c, mass)
    if not math.isfinite(radius) or radius <= 0:
        raise ParameterValidationError("radius", radius, "必须为有限正数")
    x = radius**2 / r_c**2
    if x < 1e-2:
        # R ≪ r_C 时两项相消，改用级数
        bracket = x**2 / 6.0 - x**3 / 12.0 + x**4 / 40.0 - x**5 / 180.0
    else:
        bracket = 1.0 + math.exp(-x) + (2.0 / x) * math.expm1(-x)
    value = _sphere_prefactor(radius, mass, gamma_csl, r_c) * max(bracket, 0.0)
    return LambdaResult(value, LambdaMethod.CLOSED_FORM_SPHERE_EXACT, 1e-14, (value,) * 3)


def lambda_sphere(radius: float, mass: float, gamma_csl: float, r_c: float) -> LambdaResult:
    """均匀球体 λ 的公开闭式 3γm²(1−e^{−R²/r_C²})/(8π^{3/2}m₀²r_C R⁴)

    该式省略了 O(r_C²/R²) 项；est_rel_error 给出相对精确闭式的偏差。
    """
    _validate(gamma_csl, r_c, mass)
    if not math.isfinite(radius) or radius <= 0:
        raise ParameterValidationError("radius", radius, "必须为有限正数")
    value = _sphere_prefactor(radius, mass, gamma_csl, r_c) * -math.expm1(-(radius**2) / r_c**2)

    exact = lambda_sphere_exact(radius, mass, 1.0, r_c).lambda_rate
    published = _sphere_prefactor(radius, mass, 1.0, r_c) * -math.expm1(-(radius**2) / r_c**2)
    deviation = abs(published / exact - 1.0) if exact > 0 else math.inf
    return LambdaResult(value, LambdaMethod.CLOSED_FORM_SPHERE, deviation, (value,) * 3)


def radial_lambda_sphere(
    radius: float, mass: float, gamma_csl: float, r_c: float, epsrel: float = 1e-10
) -> LambdaResult:
    """傅里叶空间一维积分

    λ = 3γm²/(2π² m₀² R⁵) ∫₀^∞ (sin u − u cos u)²/u² · e^{−u² r_C²/R²} du
    """
    _validate(gamma_csl, r_c, mass)
    if not math.isfinite(radius) or radius <= 0:
        raise ParameterValidationError("radius", radius, "必须为有限正数")

    ratio2 = (r_c / radius) ** 2

    def integrand(u: float) -> float:
        if u < 1e-3:
            # (sin u - u cos u)/u³ = 1/3 - u²/30 + ...
            core = u**2 * (1.0 / 3.0 - u**2 / 30.0)
            return core * core * math.exp(-u * u * ratio2)
        f = math.sin(u) - u * math.cos(u)
        return f * f / (u * u) * math.exp(-u * u * ratio2)

    upper = 9.0 / math.sqrt(ratio2)
    breaks = np.arange(2.0 * math.pi, upper, 2.0 * math.pi)[:1000]
    value, abserr = integrate.quad(
        integrand, 0.0, upper, epsabs=0.0, epsrel=epsrel, limit=max(200, 4 * breaks.size),
        points=breaks if breaks.size else None,
    )
    m0 = CONSTANTS.amu
    prefactor = 3.0 * gamma_csl * mass**2 / (2.0 * math.pi**2 * m0**2 * radius**5)
    rel = abserr / value if value > 0 else 0.0
    rate = prefactor * value
    return LambdaResult(rate, LambdaMethod.RADIAL_QUADRATURE_SPHERE, rel, (rate,) * 3)


# =============================================================================
# 2. 均匀长方体
# =============================================================================


def _face_term(length: float, r_c: float) -> float:
    """D(L) = (1 − e^{−L²/4r_C²})/(√π r_C)：沿梯度方向两个端面的自相关"""
    return -math.expm1(-(length**2) / (4.0 * r_c**2)) / (math.sqrt(math.pi) * r_c)


def _transverse_term(length: float, r_c: float) -> float:
    """I(L) = L·erf(L/2r_C) − (2r_C/√π)(1 − e^{−L²/4r_C²})：横向盒函数的高斯自重叠"""
    return length * special.erf(length / (2.0 * r_c)) - (2.0 * r_c / math.sqrt(math.pi)) * -math.expm1(
        -(length**2) / (4.0 * r_c**2)
    )


def lambda_cuboid(a: float, b: float, c: float, mass: float, gamma_csl: float, r_c: float) -> LambdaResult:
    """均匀长方体 λ：λ_k = (γ/m₀²)ϱ² D(a_k) I(a_{k+1}) I(a_{k+2})，λ 取三轴均值"""
    _validate(gamma_csl, r_c, mass)
    edges = (a, b, c)
    for name, value in zip(("a", "b", "c"), edges):
        if not math.isfinite(value) or value <= 0:
            raise ParameterValidationError(name, value, "必须为有限正数")

    rho = mass / (a * b * c)
    m0 = CONSTANTS.amu
    axis_rates = tuple(
        gamma_csl
        / m0**2
        * rho**2
        * _face_term(edges[k], r_c)
        * _transverse_term(edges[(k + 1) % 3], r_c)
        * _transverse_term(edges[(k + 2) % 3], r_c)
        for k in range(3)
    )
    value = math.fsum(axis_rates) / 3.0
    return LambdaResult(value, LambdaMethod.CLOSED_FORM_CUBOID, 1e-14, axis_rates)


def lambda_for_body(body: CollapseBody, mass: float, gamma_csl: float, r_c: float) -> LambdaResult:
    """按坍缩体形状选择闭式解（球体使用精确闭式）"""
    if body.shape == BodyShape.SPHERE:
        return lambda_sphere_exact(body.dimensions[0], mass, gamma_csl, r_c)
    return lambda_cuboid(*body.dimensions, mass, gamma_csl, r_c)
