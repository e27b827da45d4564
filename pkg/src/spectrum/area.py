"""
CSL噪声谱数值平台 - 谱面积与面积比

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》spectrum 模块

功能列表：
1. QuadratureConfig：自适应求积参数（来自 app_config.json）
2. 特征感知的断点布置（机械峰、腔共振、漂移矩阵本征值）
3. 带尾部估计的全实轴积分
4. area_ratio：CSL 开启/关闭的谱面积比 I
5. analytic_variance：∫S dω/2π
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from common.config import get_section
from common.contracts import NoiseModel, ParameterValidationError, QuadratureError
from models.stability import require_stable, stability_check
from models.system import SystemParams

from .density import SpectrumKernel

logger = logging.getLogger(__name__)

OBSERVABLES = ("displacement", "output")


@dataclass(frozen=True)
class QuadratureConfig:
    """自适应 Gauss–Kronrod 求积参数"""

    epsrel: float = 1e-10  # 传给 quad 的相对精度
    target_rel_error: float = 1e-6  # 验收的相对误差上限
    tail_rel_tolerance: float = 1e-8  # 尾部贡献占比上限
    panel_limit: int = 500  # 每段子区间上限
    max_tail_extensions: int = 8  # 截断频率最多扩展次数（每次 ×10）
    decades_around_features: int = 5  # 特征两侧断点的十进位数

    @classmethod
    def from_app_config(cls) -> "QuadratureConfig":
        section = get_section("quadrature")
        known = {k: section[k] for k in cls.__dataclass_fields__ if k in section}
        return cls(**known)


@dataclass(frozen=True)
class AreaRatioResult:
    """谱面积比结果"""

    I: float  # 面积比
    abs_area_csl: float  # ∫S dω（全实轴，CSL 开启），m²
    abs_area_thermal: float  # ∫S dω（Λ = 0），m²
    quadrature_rel_err: float  # 两次积分的合成相对误差
    omega_max: float  # 有限段上限 (rad/s)
    noise_model: NoiseModel
    observable: str = "displacement"


# =============================================================================
# 1. 断点布置
# =============================================================================


def spectral_features(params: SystemParams) -> List[Tuple[float, float]]:
    """(中心, 宽度) 列表：机械峰、腔共振与漂移矩阵本征值"""
    report = stability_check(params)
    kappa = params.cavity.kappa
    features = [
        (params.mirror.omega_m, 0.5 * params.mirror.gamma_m),
        (math.hypot(params.cavity.detuning, kappa), kappa),
    ]
    for ev in report.eigenvalues:
        if ev.imag >= 0:
            width = abs(ev.real) or 1e-12 * max(abs(ev.imag), 1.0)
            features.append((abs(ev.imag), width))
    return features


def breakpoints(features: List[Tuple[float, float]], upper: float, decades: int) -> np.ndarray:
    """(0, upper) 内的断点：c 及 c ± w·10^k"""
    points = []
    for center, width in features:
        points.append(center)
        for k in range(decades + 1):
            step = width * 10.0**k
            points.extend((center - step, center + step))
    points = np.unique(np.asarray(points, dtype=float))
    return points[(points > 0) & (points < upper)]


def _quad(func, a: float, b: float, cfg: QuadratureConfig, points: Optional[np.ndarray] = None):
    kwargs = dict(epsabs=0.0, epsrel=cfg.epsrel, full_output=1)
    if points is not None and points.size:
        kwargs["points"] = points
        kwargs["limit"] = max(cfg.panel_limit, 2 * points.size + 50)
    else:
        kwargs["limit"] = cfg.panel_limit
    out = integrate.quad(func, a, b, **kwargs)
    return out[0], out[1]


# =============================================================================
# 2. 半实轴积分
# =============================================================================


@dataclass(frozen=True)
class _HalfLineIntegral:
    value: float
    abs_error: float
    omega_max: float


def _integrate_half_line(
    func, features: List[Tuple[float, float]], cfg: QuadratureConfig, omega_max: Optional[float] = None
) -> _HalfLineIntegral:
    """∫₀^∞ f dω；omega_max 未给定时自动扩展直到尾部占比达标"""
    fixed = omega_max is not None
    if omega_max is None:
        omega_max = 10.0 * max(c + w for c, w in features)

    for attempt in range(cfg.max_tail_extensions + 1):
        pts = breakpoints(features, omega_max, cfg.decades_around_features)
        body, body_err = _quad(func, 0.0, omega_max, cfg, pts)
        tail, tail_err = _quad(func, omega_max, math.inf, cfg)
        total = body + tail
        if fixed or total == 0 or abs(tail) <= cfg.tail_rel_tolerance * abs(total):
            return _HalfLineIntegral(total, body_err + tail_err, omega_max)
        logger.debug(
            f"尾部占比 {abs(tail) / abs(total):.3e} 超限，截断频率 {omega_max:.3e} → {10 * omega_max:.3e}"
        )
        omega_max *= 10.0

    # 扩展次数用尽：尾部积分仍计入总值，误差按尾部估计
    return _HalfLineIntegral(total, body_err + tail_err + abs(tail), omega_max / 10.0)


def _integrand(kernel: SpectrumKernel, observable: str):
    if observable == "output":
        return lambda w: kernel.transfer(w) * kernel.value(w)
    return kernel.value


def _check_observable(params: SystemParams, observable: str) -> None:
    if observable not in OBSERVABLES:
        raise ParameterValidationError("observable", observable, f"必须为 {OBSERVABLES} 之一")
    if observable == "output" and params.derived.alpha_s == 0:
        raise ParameterValidationError("cavity.power_w", params.cavity.power, "输出谱面积需要非零驱动")


# =============================================================================
# 3. 对外运算
# =============================================================================


def area_ratio(
    params: SystemParams,
    quadrature_cfg: Optional[QuadratureConfig] = None,
    noise_model: NoiseModel = NoiseModel.FULL_COTH,
    observable: str = "displacement",
    force: bool = False,
) -> AreaRatioResult:
    """I = ∫S dω / ∫S_{Λ=0} dω，两次积分使用相同断点与截断频率"""
    require_stable(params, force)
    _check_observable(params, observable)
    cfg = quadrature_cfg or QuadratureConfig.from_app_config()
    noise_model = NoiseModel(noise_model)

    start = time.perf_counter()
    kernel = SpectrumKernel.from_params(params, noise_model)
    features = spectral_features(params)

    on = _integrate_half_line(_integrand(kernel, observable), features, cfg)
    if kernel.Lambda == 0:
        off = on
        ratio = 1.0
    else:
        off = _integrate_half_line(
            _integrand(kernel.with_Lambda(0.0), observable), features, cfg, on.omega_max
        )
        ratio = on.value / off.value

    rel_err = on.abs_error / abs(on.value) + (off.abs_error / abs(off.value) if off is not on else 0.0)
    if not math.isfinite(rel_err) or rel_err > cfg.target_rel_error:
        raise QuadratureError(rel_err, cfg.target_rel_error)

    logger.info(
        f"面积比 I = {ratio:.9g} ({noise_model.value}, {observable})，"
        f"相对误差 {rel_err:.2e}，耗时 {time.perf_counter() - start:.3f}s"
    )
    return AreaRatioResult(
        I=ratio,
        abs_area_csl=2.0 * on.value,
        abs_area_thermal=2.0 * off.value,
        quadrature_rel_err=rel_err,
        omega_max=on.omega_max,
        noise_model=noise_model,
        observable=observable,
    )


def analytic_variance(
    params: SystemParams,
    noise_model: NoiseModel = NoiseModel.MARKOV_WHITE,
    quadrature_cfg: Optional[QuadratureConfig] = None,
    force: bool = False,
) -> float:
    """⟨δq²⟩ = ∫S dω/2π（全实轴），单位 m²"""
    require_stable(params, force)
    cfg = quadrature_cfg or QuadratureConfig.from_app_config()
    kernel = SpectrumKernel.from_params(params, noise_model)
    result = _integrate_half_line(kernel.value, spectral_features(params), cfg)
    rel_err = result.abs_error / abs(result.value) if result.value else 0.0
    if rel_err > cfg.target_rel_error:
        raise QuadratureError(rel_err, cfg.target_rel_error)
    return 2.0 * result.value / (2.0 * math.pi)
