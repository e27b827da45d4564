"""
CSL噪声谱数值平台 - 位移噪声谱

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》spectrum 模块

功能列表：
1. ω·coth(βω) 的数值稳定实现
2. 位移噪声谱 S(ω)：dns_point（三种噪声模型）
3. 零耦合共振极限 dns_peak_limit
4. 腔外相位正交分量谱 dns_output
5. 频率网格 GridSpec 与向量化 spectrum_grid
6. 机械共振峰值 find_peak / peak_value

S(ω) = [2α²ħ²κχ²(Δ²+κ²+ω²) + ħm((Δ²+κ²−ω²)²+4κ²ω²)·N(ω)] / |D(ω)|²
D(ω) = 2α²Δħχ² + m(ω²−ω_m²−iγ_mω)[Δ²+(κ+iω)²]
N(ω) 为热噪声与 CSL 噪声项：
    full_coth         γ_m·ωcoth(βω) + Λ|ω|
    classical_markov  γ_m/β + Λ|ω|
    markov_white      γ_m/β + Λω_m
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple, Union

import numpy as np
from scipy import optimize

from common.contracts import (
    DISPLACEMENT_KINDS,
    GridSpecError,
    NoiseModel,
    ParameterValidationError,
    Spectrum,
    SpectrumEvaluationError,
    SpectrumKind,
)
from models.stability import require_stable
from models.system import SystemParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SERIES_THRESHOLD = 1e-4  # |βω| 低于此值用级数
SATURATION_THRESHOLD = 40.0  # |βω| 高于此值 coth = sign


# =============================================================================
# 1. ω·coth(βω)
# =============================================================================


def omega_coth(omega: np.ndarray, beta: float) -> np.ndarray:
    """ω·coth(βω)，ω = 0 处取极限 1/β"""
    omega = np.asarray(omega, dtype=float)
    x = beta * omega
    ax = np.abs(x)
    out = np.empty_like(omega)

    small = ax < SERIES_THRESHOLD
    large = ax > SATURATION_THRESHOLD
    mid = ~(small | large)

    xs = x[small]
    out[small] = (1.0 + xs * xs / 3.0 - xs**4 / 45.0) / beta
    out[large] = np.abs(omega[large])
    out[mid] = omega[mid] / np.tanh(x[mid])
    return out


def _omega_coth_scalar(omega: float, beta: float) -> float:
    x = beta * omega
    ax = abs(x)
    if ax < SERIES_THRESHOLD:
        return (1.0 + x * x / 3.0 - x**4 / 45.0) / beta
    if ax > SATURATION_THRESHOLD:
        return abs(omega)
    return omega / math.tanh(x)


# =============================================================================
# 2. 谱核
# =============================================================================


@dataclass(frozen=True)
class SpectrumKernel:
    """预计算的谱系数；values 用于网格，value 用于求积"""

    mass: float
    omega_m: float
    gamma_m: float
    kappa: float
    detuning: float
    beta: float
    Lambda: float
    shot_prefactor: float  # 2α²ħ²κχ²
    hbar_m: float  # ħm
    coupling: float  # 2α²Δħχ²
    transfer_prefactor: float  # 4α²χ²
    noise_model: NoiseModel

    @classmethod
    def from_params(cls, params: SystemParams, noise_model: NoiseModel) -> "SpectrumKernel":
        hbar = params.constants.hbar
        alpha2 = params.derived.alpha_s**2
        chi2 = params.derived.chi**2
        kappa = params.cavity.kappa
        delta = params.cavity.detuning
        return cls(
            mass=params.mirror.mass,
            omega_m=params.mirror.omega_m,
            gamma_m=params.mirror.gamma_m,
            kappa=kappa,
            detuning=delta,
            beta=params.derived.beta,
            Lambda=params.collapse.Lambda,
            shot_prefactor=2.0 * alpha2 * hbar**2 * kappa * chi2,
            hbar_m=hbar * params.mirror.mass,
            coupling=2.0 * alpha2 * delta * hbar * chi2,
            transfer_prefactor=4.0 * alpha2 * chi2,
            noise_model=NoiseModel(noise_model),
        )

    def with_Lambda(self, Lambda: float) -> "SpectrumKernel":
        return replace(self, Lambda=Lambda)

    def _rational(self, omega: ArrayLike, noise: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """分子与 |D|²；float 与 ndarray 共用同一算术表达式"""
        w2 = omega * omega
        cav = self.detuning * self.detuning + self.kappa * self.kappa
        re_c = cav - w2
        im_c = 2.0 * self.kappa * omega
        cavity_modulus = re_c * re_c + im_c * im_c

        numerator = self.shot_prefactor * (cav + w2) + self.hbar_m * cavity_modulus * noise

        re_m = self.mass * (w2 - self.omega_m * self.omega_m)
        im_m = -self.mass * self.gamma_m * omega
        re = self.coupling + re_m * re_c - im_m * im_c
        im = re_m * im_c + im_m * re_c
        return numerator, re * re + im * im

    def _noise_term(self, omega: np.ndarray) -> np.ndarray:
        if self.noise_model == NoiseModel.FULL_COTH:
            return self.gamma_m * omega_coth(omega, self.beta) + self.Lambda * np.abs(omega)
        if self.noise_model == NoiseModel.CLASSICAL_MARKOV:
            return self.gamma_m / self.beta + self.Lambda * np.abs(omega)
        return np.full_like(omega, self.gamma_m / self.beta + self.Lambda * self.omega_m)

    def _noise_term_scalar(self, omega: float) -> float:
        if self.noise_model == NoiseModel.FULL_COTH:
            return self.gamma_m * _omega_coth_scalar(omega, self.beta) + self.Lambda * abs(omega)
        if self.noise_model == NoiseModel.CLASSICAL_MARKOV:
            return self.gamma_m / self.beta + self.Lambda * abs(omega)
        return self.gamma_m / self.beta + self.Lambda * self.omega_m

    def values(self, omegas: np.ndarray) -> np.ndarray:
        """网格上的 S(ω)"""
        omegas = np.asarray(omegas, dtype=float)
        numerator, denominator = self._rational(omegas, self._noise_term(omegas))
        zero = denominator == 0
        if np.any(zero):
            raise SpectrumEvaluationError(float(omegas[np.argmax(zero)]))
        return numerator / denominator

    def value(self, omega: float) -> float:
        """单点 S(ω)（纯 float 运算，供求积使用）"""
        numerator, denominator = self._rational(omega, self._noise_term_scalar(omega))
        if denominator == 0:
            raise SpectrumEvaluationError(omega)
        return numerator / denominator

    def transfer(self, omega: ArrayLike) -> ArrayLike:
        """S_yout 传递因子 4α²χ²(κ²+ω²)/|Δ²+(κ−iω)²|²"""
        w2 = omega * omega
        re_c = self.detuning * self.detuning + self.kappa * self.kappa - w2
        im_c = 2.0 * self.kappa * omega
        return self.transfer_prefactor * (self.kappa * self.kappa + w2) / (re_c * re_c + im_c * im_c)


# =============================================================================
# 3. 单点运算
# =============================================================================


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not math.isfinite(omega):
        raise ParameterValidationError("omega", omega, "必须为有限数")
    return omega


def dns_point(
    params: SystemParams,
    omega: float,
    noise_model: NoiseModel = NoiseModel.FULL_COTH,
    force: bool = False,
) -> float:
    """单频点位移噪声谱 S(ω)，单位 m²·s"""
    require_stable(params, force)
    omega = _check_omega(omega)
    kernel = SpectrumKernel.from_params(params, noise_model)
    return float(kernel.values(np.array([omega]))[0])


def dns_peak_limit(params: SystemParams) -> float:
    """零耦合、零温极限下的共振值 ħ(γ_m+Λ)/(mω_mγ_m²)"""
    gm = params.mirror.gamma_m
    return (
        params.constants.hbar
        * (gm + params.collapse.Lambda)
        / (params.mirror.mass * params.mirror.omega_m * gm**2)
    )


def dns_output(
    params: SystemParams,
    omega: float,
    noise_model: NoiseModel = NoiseModel.FULL_COTH,
    force: bool = False,
) -> float:
    """腔外相位正交分量谱 S_yout(ω) = 1 + T(ω)·S(ω)，无量纲（散粒噪声为 1）"""
    require_stable(params, force)
    omega = _check_omega(omega)
    kernel = SpectrumKernel.from_params(params, noise_model)
    grid = np.array([omega])
    return float((1.0 + kernel.transfer(grid) * kernel.values(grid))[0])


# =============================================================================
# 4. 频率网格
# =============================================================================


@dataclass(frozen=True)
class GridSpec:
    """频率网格描述"""

    kind: str  # "linear" | "log_symmetric"
    omega_min: float  # rad/s；log_symmetric 时为最小正频率
    omega_max: float  # rad/s
    points: int  # linear: 总点数；log_symmetric: 单侧点数
    include_zero: bool = True  # 仅 log_symmetric

    def __post_init__(self):
        if self.kind not in ("linear", "log_symmetric"):
            raise GridSpecError(f"未知网格类型: {self.kind}")
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise GridSpecError("网格端点必须为有限数")
        if self.omega_min >= self.omega_max:
            raise GridSpecError(f"omega_min ({self.omega_min}) 必须小于 omega_max ({self.omega_max})")
        if self.kind == "linear" and self.points < 2:
            raise GridSpecError("linear 网格至少需要 2 个点")
        if self.kind == "log_symmetric":
            if self.omega_min <= 0:
                raise GridSpecError("log_symmetric 网格的 omega_min 必须为正")
            if self.points < 1:
                raise GridSpecError("log_symmetric 网格每侧至少 1 个点")

    @classmethod
    def linear(cls, omega_min: float, omega_max: float, points: int) -> "GridSpec":
        return cls("linear", float(omega_min), float(omega_max), int(points))

    @classmethod
    def log_symmetric(
        cls, omega_lo: float, omega_hi: float, points_per_side: int, include_zero: bool = True
    ) -> "GridSpec":
        return cls("log_symmetric", float(omega_lo), float(omega_hi), int(points_per_side), include_zero)

    def omegas(self) -> np.ndarray:
        if self.kind == "linear":
            if self.omega_min == -self.omega_max:
                # 关于 0 精确对称
                step = 2.0 * self.omega_max / (self.points - 1)
                return (np.arange(self.points) - 0.5 * (self.points - 1)) * step
            return np.linspace(self.omega_min, self.omega_max, self.points)
        positive = np.geomspace(self.omega_min, self.omega_max, self.points)
        parts = [-positive[::-1]]
        if self.include_zero:
            parts.append(np.zeros(1))
        parts.append(positive)
        return np.concatenate(parts)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "omega_min_rad_per_s": self.omega_min,
            "omega_max_rad_per_s": self.omega_max,
            "points": self.points,
            "include_zero": self.include_zero,
        }


def spectrum_grid(
    params: SystemParams,
    grid: Union[GridSpec, np.ndarray],
    kind: SpectrumKind = SpectrumKind.DISPLACEMENT_FULL,
    force: bool = False,
) -> Spectrum:
    """在网格上向量化计算位移谱或输出谱"""
    require_stable(params, force)
    omegas = grid.omegas() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0 or not np.all(np.isfinite(omegas)):
        raise GridSpecError("频率网格必须为非空有限一维数组")

    kind = SpectrumKind(kind)
    if kind == SpectrumKind.OUTPUT_QUADRATURE:
        kernel = SpectrumKernel.from_params(params, NoiseModel.FULL_COTH)
        values = 1.0 + kernel.transfer(omegas) * kernel.values(omegas)
        noise_model = NoiseModel.FULL_COTH
    else:
        noise_model = next((nm for nm, k in DISPLACEMENT_KINDS.items() if k == kind), None)
        if noise_model is None:
            raise GridSpecError(f"无法解析计算的谱类型: {kind.value}")
        values = SpectrumKernel.from_params(params, noise_model).values(omegas)

    logger.debug(f"谱网格计算完成: {kind.value}, {omegas.size} 点")
    return Spectrum(
        omegas=omegas,
        values=values,
        kind=kind,
        params_fingerprint=params.fingerprint,
        metadata={"Lambda_rad_per_s": params.collapse.Lambda, "noise_model": noise_model.value},
    )


# =============================================================================
# 5. 共振峰
# =============================================================================


def find_peak(
    params: SystemParams, noise_model: NoiseModel = NoiseModel.FULL_COTH, force: bool = False
) -> Tuple[float, float]:
    """机械共振峰位置与峰值 (ω_peak, S_max)"""
    report = require_stable(params, force)
    kernel = SpectrumKernel.from_params(params, noise_model)
    center = report.effective_frequency
    width = max(0.5 * report.effective_damping, 1e-12 * center)

    lo = max(center - 5.0 * width, 0.0)
    hi = center + 5.0 * width
    samples = np.linspace(lo, hi, 2001)
    values = kernel.values(samples)
    i = int(np.argmax(values))
    a = samples[max(i - 1, 0)]
    b = samples[min(i + 1, samples.size - 1)]

    result = optimize.minimize_scalar(
        lambda w: -kernel.value(w), bounds=(a, b), method="bounded", options={"xatol": 1e-9 * center}
    )
    if result.success and -result.fun >= values[i]:
        return float(result.x), float(-result.fun)
    return float(samples[i]), float(values[i])


def peak_value(
    params: SystemParams, noise_model: NoiseModel = NoiseModel.FULL_COTH, force: bool = False
) -> float:
    """机械共振处的谱峰值 (m²·s)"""
    return find_peak(params, noise_model, force)[1]
