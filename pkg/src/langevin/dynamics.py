"""
CSL噪声谱数值平台 - 线性化涨落动力学

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》langevin 模块

功能列表：
1. 线性 SDE 的漂移矩阵与各噪声通道幅度（物理单位与零点标度单位）
2. 稳态协方差（连续 Lyapunov 方程）
3. 精确离散化：转移矩阵与步长协方差（Van Loan 块指数）

状态 (δq, δp, δx, δy)；噪声通道 0 热噪声、1 CSL、2 δx 输入、3 δy 输入。
热噪声与 CSL 力作用于 δp，两路输入噪声分别作用于 δx、δy。
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from common.contracts import ParameterValidationError
from models.stability import physical_drift, scaled_drift, scaling_vector
from models.system import SystemParams

CHANNEL_NAMES = ("thermal", "csl", "input_x", "input_y")
CHANNEL_TARGETS = (1, 1, 2, 3)  # 通道作用的状态分量


@dataclass(frozen=True)
class DriftAndNoise:
    """线性 SDE dX = A X dt + B dW 的系数"""

    drift: np.ndarray  # 4×4，物理单位
    noise_amplitudes: np.ndarray  # (4,)，各通道幅度，物理单位
    scaled_drift: np.ndarray  # 4×4，零点标度坐标
    scaled_amplitudes: np.ndarray  # (4,)，零点标度坐标
    scale: np.ndarray  # 物理 = 标度 × scale

    def diffusion(self, gains: Sequence[float] = (1.0, 1.0, 1.0, 1.0), scaled: bool = True) -> np.ndarray:
        """4×4 扩散矩阵 B（列对应噪声通道）"""
        amplitudes = self.scaled_amplitudes if scaled else self.noise_amplitudes
        B = np.zeros((4, 4))
        for channel, target in enumerate(CHANNEL_TARGETS):
            B[target, channel] = amplitudes[channel] * float(gains[channel])
        return B


def drift_and_noise(params: SystemParams) -> DriftAndNoise:
    """由参数构造漂移矩阵与噪声幅度

    热噪声取经典马尔可夫极限 √(2mγ_m k_B T)，CSL 力 ħ√λ，腔输入噪声 √(2κ)。
    """
    m = params.mirror.mass
    gm = params.mirror.gamma_m
    wm = params.mirror.omega_m
    kT = params.constants.k_B * params.mirror.temperature
    hbar = params.constants.hbar
    kappa = params.cavity.kappa
    lam = params.collapse.lambda_rate

    physical = np.array(
        [
            math.sqrt(2.0 * m * gm * kT),
            hbar * math.sqrt(lam),
            math.sqrt(2.0 * kappa),
            math.sqrt(2.0 * kappa),
        ]
    )
    scaled = np.array(
        [
            math.sqrt(2.0 * gm * kT / (hbar * wm)),
            math.sqrt(params.collapse.Lambda),
            math.sqrt(2.0 * kappa),
            math.sqrt(2.0 * kappa),
        ]
    )
    return DriftAndNoise(
        drift=physical_drift(params),
        noise_amplitudes=physical,
        scaled_drift=scaled_drift(params),
        scaled_amplitudes=scaled,
        scale=scaling_vector(params),
    )


def _check_gains(gains: Sequence[float]) -> Tuple[float, ...]:
    gains = tuple(float(g) for g in gains)
    if len(gains) != 4 or any(not math.isfinite(g) or g < 0 for g in gains):
        raise ParameterValidationError("noise_gains", gains, "需要 4 个有限非负增益")
    return gains


def scaled_stationary_covariance(
    params: SystemParams, gains: Sequence[float] = (1.0, 1.0, 1.0, 1.0)
) -> np.ndarray:
    """标度坐标下的稳态协方差：A P + P Aᵀ + B Bᵀ = 0"""
    gains = _check_gains(gains)
    sde = drift_and_noise(params)
    B = sde.diffusion(gains)
    P = linalg.solve_continuous_lyapunov(sde.scaled_drift, -B @ B.T)
    return 0.5 * (P + P.T)


def stationary_covariance(
    params: SystemParams, gains: Sequence[float] = (1.0, 1.0, 1.0, 1.0)
) -> np.ndarray:
    """物理单位的稳态协方差，P[0, 0] 即 ⟨δq²⟩ (m²)"""
    P = scaled_stationary_covariance(params, gains)
    s = scaling_vector(params)
    return P * np.outer(s, s)


def discretize_exact(
    drift: np.ndarray, diffusion: np.ndarray, dt: float
) -> Tuple[np.ndarray, np.ndarray]:
    """线性 SDE 的精确离散化 (Φ, Q_dt)

    Van Loan：expm([[−A, BBᵀ], [0, Aᵀ]]·dt) = [[·, F12], [0, F22]]，Φ = F22ᵀ，Q = Φ·F12。
    """
    n = drift.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -drift
    block[:n, n:] = diffusion @ diffusion.T
    block[n:, n:] = drift.T
    F = linalg.expm(block * dt)
    phi = F[n:, n:].T
    Q = phi @ F[:n, n:]
    return phi, 0.5 * (Q + Q.T)


def covariance_factor(cov: np.ndarray) -> np.ndarray:
    """半正定矩阵的平方根因子 L（L Lᵀ = cov），允许奇异"""
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    return V * np.sqrt(np.clip(w, 0.0, None))
