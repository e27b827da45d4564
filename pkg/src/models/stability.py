"""
CSL噪声谱数值平台 - 线性化系统稳定性检查

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》model 模块

功能列表：
1. 物理坐标与零点标度坐标下的 4×4 漂移矩阵
2. Faddeev–LeVerrier 特征多项式（不依赖本征求解器）
3. Routh–Hurwitz 判据
4. StabilityReport 与 require_stable 守卫
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from common.contracts import StabilityError

from .system import SystemParams

logger = logging.getLogger(__name__)


# =============================================================================
# 1. 漂移矩阵
# =============================================================================


def physical_drift(params: SystemParams) -> np.ndarray:
    """状态 (δq, δp, δx, δy) 的漂移矩阵，SI 单位"""
    m = params.mirror.mass
    wm = params.mirror.omega_m
    gm = params.mirror.gamma_m
    kappa = params.cavity.kappa
    delta = params.cavity.detuning
    chi = params.derived.chi
    alpha = params.derived.alpha_s
    hbar = params.constants.hbar
    return np.array(
        [
            [0.0, 1.0 / m, 0.0, 0.0],
            [-m * wm**2, -gm, hbar * chi * alpha, 0.0],
            [0.0, 0.0, -kappa, delta],
            [2.0 * alpha * chi, 0.0, -delta, -kappa],
        ]
    )


def coupling_rate(params: SystemParams) -> float:
    """标度坐标下的耦合率 G = χ α_s x_zpf (rad/s)"""
    return params.derived.chi * params.derived.alpha_s * params.x_zpf


def scaled_drift(params: SystemParams) -> np.ndarray:
    """零点标度坐标 q̃=δq/x₀, p̃=δp/p₀ 下的漂移矩阵（与物理矩阵相似，本征值相同）"""
    wm = params.mirror.omega_m
    gm = params.mirror.gamma_m
    kappa = params.cavity.kappa
    delta = params.cavity.detuning
    G = coupling_rate(params)
    return np.array(
        [
            [0.0, wm, 0.0, 0.0],
            [-wm, -gm, G, 0.0],
            [0.0, 0.0, -kappa, delta],
            [2.0 * G, 0.0, -delta, -kappa],
        ]
    )


def scaling_vector(params: SystemParams) -> np.ndarray:
    """物理坐标 = 标度坐标 × 该向量"""
    return np.array([params.x_zpf, params.p_zpf, 1.0, 1.0])


# =============================================================================
# 2. 特征多项式与 Routh–Hurwitz
# =============================================================================


def characteristic_polynomial(matrix: np.ndarray) -> np.ndarray:
    """Faddeev–LeVerrier 递推，返回首一多项式系数（降幂）"""
    n = matrix.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    identity = np.eye(n)
    M = np.zeros_like(matrix, dtype=float)
    for k in range(1, n + 1):
        M = matrix @ M + coeffs[k - 1] * identity
        coeffs[k] = -np.trace(matrix @ M) / k
    return coeffs


def routh_hurwitz_stable(coeffs: np.ndarray) -> bool:
    """Routh 表第一列全为正则所有根位于左半平面"""
    a = np.asarray(coeffs, dtype=float)
    if a[0] < 0:
        a = -a
    if np.any(a <= 0):
        return False

    n = a.size - 1
    width = n // 2 + 1
    rows = [np.zeros(width), np.zeros(width)]
    rows[0][: a[0::2].size] = a[0::2]
    rows[1][: a[1::2].size] = a[1::2]
    for _ in range(n - 1):
        upper, lower = rows[-2], rows[-1]
        if lower[0] <= 0:
            return False
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0]
        rows.append(new)
    return bool(all(row[0] > 0 for row in rows[: n + 1]))


# =============================================================================
# 3. 稳定性报告
# =============================================================================


@dataclass(frozen=True)
class StabilityReport:
    """线性化系统稳定性报告"""

    eigenvalues: Tuple[complex, ...]  # 漂移矩阵本征值 (s⁻¹)
    stable: bool  # 全部实部严格为负
    max_real_part: float  # 最大实部
    routh_hurwitz_stable: bool  # 特征多项式判据
    char_poly: Tuple[float, ...]  # 标度漂移矩阵特征多项式系数
    mechanical_pole: complex  # 最接近 -γ_m/2 + iω_m 的本征值

    @property
    def effective_frequency(self) -> float:
        """机械共振的有效角频率（含光学弹簧）"""
        return abs(self.mechanical_pole.imag)

    @property
    def effective_damping(self) -> float:
        """机械共振的有效能量阻尼率（含光学阻尼）"""
        return -2.0 * self.mechanical_pole.real

    @property
    def spectral_radius(self) -> float:
        return max(abs(ev) for ev in self.eigenvalues)


@lru_cache(maxsize=512)
def stability_check(params: SystemParams) -> StabilityReport:
    """计算漂移矩阵本征值并交叉核对 Routh–Hurwitz 判据"""
    A = scaled_drift(params)
    eigenvalues = np.linalg.eigvals(A)
    max_real = float(np.max(eigenvalues.real))
    coeffs = characteristic_polynomial(A)
    rh_stable = routh_hurwitz_stable(coeffs)

    target = complex(-0.5 * params.mirror.gamma_m, params.mirror.omega_m)
    upper = [ev for ev in eigenvalues if ev.imag >= 0.0] or list(eigenvalues)
    pole = min(upper, key=lambda ev: abs(ev - target))

    stable = bool(max_real < 0.0)
    if stable != rh_stable:
        logger.warning(
            f"本征值判据与 Routh–Hurwitz 判据不一致 (max Re={max_real:.6g}, RH={rh_stable})"
        )
    return StabilityReport(
        eigenvalues=tuple(complex(ev) for ev in eigenvalues),
        stable=stable,
        max_real_part=max_real,
        routh_hurwitz_stable=rh_stable,
        char_poly=tuple(float(c) for c in coeffs),
        mechanical_pole=complex(pole),
    )


def require_stable(params: SystemParams, force: bool = False) -> StabilityReport:
    """不稳定且未强制时抛出 StabilityError"""
    report = stability_check(params)
    if not report.stable:
        if not force:
            raise StabilityError(report.max_real_part)
        logger.warning(f"强制在不稳定参数下计算 (max Re={report.max_real_part:.6g})")
    return report
