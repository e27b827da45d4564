"""
CSL噪声谱数值平台 - 功率谱估计与比较

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》langevin 模块

功能列表：
1. estimate_psd：多实现 Welch 双边功率谱（scipy.signal.welch）
2. welch_psd：TraceEnsemble → Spectrum
3. analytic_on_grid：在测量网格上重新计算解析谱
4. compare_psd：频带内相对偏差报告
5. ensemble_variance：⟨δq²⟩ 及实现级标准误差

归一化约定：返回值 P(ω) 满足 ∫P dω/2π = 方差，数值上等于每 Hz 的双边密度。
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import signal

from common.config import get_section
from common.contracts import (
    DISPLACEMENT_KINDS,
    EmptyBandError,
    NoiseModel,
    SimConfigError,
    Spectrum,
    SpectrumKind,
)
from models.system import SystemParams
from spectrum.density import spectrum_grid

from .simulator import TraceEnsemble

logger = logging.getLogger(__name__)


# =============================================================================
# 1. Welch 估计
# =============================================================================


def _validate_welch(n_samples: int, segment_length: int, overlap: float) -> None:
    if segment_length < 2:
        raise SimConfigError("segment_length", "至少 2 个采样点")
    if segment_length > n_samples:
        raise SimConfigError("segment_length", f"段长 {segment_length} 超过轨迹长度 {n_samples}")
    if not 0.0 <= overlap <= 0.9:
        raise SimConfigError("overlap", f"必须位于 [0, 0.9]，实际 {overlap}")


def estimate_psd(
    samples: np.ndarray,
    dt: float,
    segment_length: int,
    overlap: float = 0.5,
    window: str = "hann",
) -> Tuple[np.ndarray, np.ndarray]:
    """对 (R, N) 或 (N,) 采样做双边 Welch 估计并对实现求平均

    返回 (ω 网格 rad/s 递增, P(ω))。
    """
    data = np.atleast_2d(np.asarray(samples, dtype=float))
    segment_length = int(segment_length)
    _validate_welch(data.shape[1], segment_length, overlap)
    if not math.isfinite(dt) or dt <= 0:
        raise SimConfigError("dt", "必须为有限正数")

    freqs, pxx = signal.welch(
        data,
        fs=1.0 / dt,
        window=window,
        nperseg=segment_length,
        noverlap=int(round(overlap * segment_length)),
        detrend=False,
        return_onesided=False,
        scaling="density",
        axis=-1,
    )
    mean = pxx.mean(axis=0)
    return 2.0 * math.pi * np.fft.fftshift(freqs), np.fft.fftshift(mean)


def default_segment_length(n_samples: int, dt: float, omega_m: Optional[float] = None) -> int:
    """分辨率 Δω = resolution_fraction·ω_m 对应的段长（取 2 的幂，不超过轨迹长度）

    高 Q 振子（γ_m ≪ resolution_fraction·ω_m）的共振峰在该分辨率下被窗函数展宽，
    峰值偏低；中位相对偏差由峰外频段主导。需要分辨峰时显式给出更长的段。
    """
    welch = get_section("welch")
    if omega_m:
        target = 2.0 * math.pi / (welch.get("resolution_fraction", 0.0025) * omega_m * dt)
    else:
        target = n_samples / 4.0
    length = 2 ** int(round(math.log2(max(target, 2.0))))
    while length > n_samples and length > 2:
        length //= 2
    return length


def welch_psd(
    ensemble: TraceEnsemble,
    segment_length: Optional[int] = None,
    window: str = "hann",
    overlap: Optional[float] = None,
) -> Spectrum:
    """δq 的双边功率谱（段与实现平均）"""
    if overlap is None:
        overlap = get_section("welch").get("overlap", 0.5)
    if segment_length is None:
        segment_length = default_segment_length(
            ensemble.n_samples, ensemble.dt, ensemble.metadata.get("omega_m_rad_per_s")
        )
    omegas, values = estimate_psd(ensemble.dq, ensemble.dt, segment_length, overlap, window)
    step = segment_length - int(round(overlap * segment_length))
    n_segments = 1 + (ensemble.n_samples - segment_length) // step
    resolution = 2.0 * math.pi / (segment_length * ensemble.dt)
    linewidth = ensemble.metadata.get("gamma_m_rad_per_s")
    resolves_peak = linewidth is None or resolution <= linewidth
    if not resolves_peak:
        logger.warning(f"Welch 分辨率 {resolution:.4g} rad/s 宽于机械线宽 {linewidth:.4g} rad/s，共振峰未被分辨")
    logger.debug(
        f"Welch 估计: 段长 {segment_length}, 每实现 {n_segments} 段, {ensemble.n_realizations} 个实现"
    )
    return Spectrum(
        omegas=omegas,
        values=values,
        kind=SpectrumKind.MEASURED,
        params_fingerprint=ensemble.params_fingerprint,
        metadata={
            "segment_length": int(segment_length),
            "overlap": float(overlap),
            "window": window,
            "segments_per_realization": int(n_segments),
            "realizations": ensemble.n_realizations,
            "resolution_rad_per_s": resolution,
            "resolves_peak": bool(resolves_peak),
        },
    )


def analytic_on_grid(
    params: SystemParams, omegas: np.ndarray, noise_model: NoiseModel = NoiseModel.MARKOV_WHITE
) -> Spectrum:
    """在给定网格上计算解析位移谱"""
    return spectrum_grid(params, np.asarray(omegas, dtype=float), DISPLACEMENT_KINDS[NoiseModel(noise_model)])


# =============================================================================
# 2. 比较
# =============================================================================


@dataclass(frozen=True)
class ComparisonReport:
    """频带内测量谱与解析谱的比较"""

    band: Tuple[float, float]  # |ω| 范围 (rad/s)
    n_bins: int  # 频带内点数
    max_rel_dev: float  # 最大相对偏差
    median_rel_dev: float  # 中位相对偏差
    peak_abs_dev_omega: float  # 绝对偏差最大处的 ω
    tolerance: float  # 中位偏差容差
    passed: bool


def compare_psd(
    measured: Spectrum,
    analytic: Spectrum,
    band: Tuple[float, float],
    tolerance: Optional[float] = None,
) -> ComparisonReport:
    """|ω| ∈ band 内的相对偏差；解析谱插值到测量网格"""
    if tolerance is None:
        tolerance = get_section("welch").get("default_tolerance", 0.10)
    lo, hi = float(band[0]), float(band[1])

    omegas = measured.omegas
    mask = (np.abs(omegas) >= lo) & (np.abs(omegas) <= hi)
    if lo > hi or not np.any(mask):
        raise EmptyBandError((lo, hi))

    if analytic.omegas.shape == omegas.shape and np.array_equal(analytic.omegas, omegas):
        reference = analytic.values
    else:
        reference = np.interp(omegas, analytic.omegas, analytic.values)

    m = measured.values[mask]
    a = reference[mask]
    abs_dev = np.abs(m - a)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(a > 0, abs_dev / a, np.where(abs_dev == 0, 0.0, np.inf))

    median = float(np.median(rel))
    report = ComparisonReport(
        band=(lo, hi),
        n_bins=int(mask.sum()),
        max_rel_dev=float(np.max(rel)),
        median_rel_dev=median,
        peak_abs_dev_omega=float(omegas[mask][int(np.argmax(abs_dev))]),
        tolerance=float(tolerance),
        passed=bool(median <= tolerance),
    )
    logger.info(
        f"谱比较: 频带 [{lo:.4g}, {hi:.4g}] rad/s, {report.n_bins} 点, "
        f"中位偏差 {median:.3%}, 最大偏差 {report.max_rel_dev:.3%}, {'通过' if report.passed else '未通过'}"
    )
    return report


def ensemble_variance(ensemble: TraceEnsemble) -> Tuple[float, float]:
    """⟨δq²⟩ (m²) 及其实现级标准误差"""
    per_realization = np.mean(ensemble.dq**2, axis=1)
    variance = float(np.mean(per_realization))
    if per_realization.size < 2:
        return variance, math.inf
    stderr = float(np.std(per_realization, ddof=1) / math.sqrt(per_realization.size))
    return variance, stderr
