"""
CSL噪声谱数值平台 - 体素网格上的坍缩速率

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》geometry 模块

功能列表：
1. 直接双重求和 lambda_voxel_direct（校验基准，清晰优先）
2. FFT 卷积快速路径 lambda_voxel_convolution
3. 精度门限（h ≤ r_C/4）与边界检查
4. 按块并行、按块顺序 fsum 归约，结果与线程数无关

两条路径计算同一个离散二次型：
    λ = (γ/3m₀²) h⁶ Σ_k Σ_ij G(r_i − r_j) ∂_kϱ_i ∂_kϱ_j
G(r) = exp(−r²/4r_C²)/(2√π r_C)³，|r| > 6r_C 处截断为 0。
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from scipy import signal

from common.config import get_section
from common.contracts import AccuracyError, ParameterValidationError
from common.environment import default_worker_count
from models.constants import CONSTANTS

from .closed_forms import LambdaMethod, LambdaResult
from .distributions import VoxelGrid

logger = logging.getLogger(__name__)


# =============================================================================
# 1. 公共准备
# =============================================================================


def _check_inputs(grid: VoxelGrid, gamma_csl: float, r_c: float) -> None:
    if not math.isfinite(gamma_csl) or gamma_csl < 0:
        raise ParameterValidationError("gamma_csl", gamma_csl, "必须为有限非负数")
    if not math.isfinite(r_c) or r_c <= 0:
        raise ParameterValidationError("r_c", r_c, "必须为有限正数")
    ratio = get_section("geometry").get("accuracy_ratio", 0.25)
    limit = ratio * r_c
    if grid.spacing > limit:
        raise AccuracyError(grid.spacing, limit)
    grid.check_padding()


def _cutoff_cells2(grid: VoxelGrid, r_c: float) -> Tuple[float, float]:
    """截断半径（以体素间距为单位的平方）与 h²/(4r_C²)"""
    radii = get_section("geometry").get("kernel_truncation_radii", 6.0)
    cutoff2 = (radii * r_c) ** 2 / grid.spacing**2
    return cutoff2, grid.spacing**2 / (4.0 * r_c**2)


def _kernel_from_r2(r2_int: np.ndarray, cutoff2: float, scale: float, norm: float) -> np.ndarray:
    """整数距离平方 → 截断高斯核值；两条路径共用同一表达式"""
    kernel = norm * np.exp(-r2_int * scale)
    kernel[r2_int > cutoff2] = 0.0
    return kernel


def _prefactor(gamma_csl: float, spacing: float) -> float:
    return gamma_csl / (3.0 * CONSTANTS.amu**2) * spacing**6


def _resolve_workers(max_workers: Optional[int]) -> int:
    return max(1, int(max_workers) if max_workers else default_worker_count())


def _spacing_error(grid: VoxelGrid, r_c: float) -> float:
    """二阶离散误差的量级估计 (h/r_C)²"""
    return (grid.spacing / r_c) ** 2


# =============================================================================
# 2. 直接双重求和
# =============================================================================


def lambda_voxel_direct(
    grid: VoxelGrid, gamma_csl: float, r_c: float, max_workers: Optional[int] = None
) -> LambdaResult:
    """O(N²) 直接求和，只遍历梯度非零的体素"""
    _check_inputs(grid, gamma_csl, r_c)
    if gamma_csl == 0:
        return LambdaResult(0.0, LambdaMethod.VOXEL_DIRECT, 0.0, (0.0, 0.0, 0.0))

    start = time.perf_counter()
    gradients = np.gradient(grid.densities, grid.spacing)
    support = np.zeros(grid.shape, dtype=bool)
    for g in gradients:
        support |= g != 0
    index = np.argwhere(support)
    values = [g[support] for g in gradients]
    ii, jj, kk = (index[:, a].astype(np.int64) for a in range(3))

    cutoff2, scale = _cutoff_cells2(grid, r_c)
    norm = 1.0 / (2.0 * math.sqrt(math.pi) * r_c) ** 3
    block_rows = int(get_section("geometry").get("block_rows", 256))
    blocks = [(s, min(s + block_rows, index.shape[0])) for s in range(0, index.shape[0], block_rows)]

    def run_block(bounds: Tuple[int, int]) -> Tuple[float, float, float]:
        s, e = bounds
        di = ii[s:e, None] - ii[None, :]
        dj = jj[s:e, None] - jj[None, :]
        dk = kk[s:e, None] - kk[None, :]
        r2_int = di * di + dj * dj + dk * dk
        kernel = _kernel_from_r2(r2_int, cutoff2, scale, norm)
        return tuple(
            float(np.sum(kernel * (values[a][s:e, None] * values[a][None, :]))) for a in range(3)
        )

    workers = _resolve_workers(max_workers)
    logger.debug(f"直接求和: 支撑体素 {index.shape[0]}, 块数 {len(blocks)}, 线程 {workers}")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        partials: List[Tuple[float, float, float]] = list(executor.map(run_block, blocks))

    pref = _prefactor(gamma_csl, grid.spacing)
    axis_sums = tuple(pref * 3.0 * math.fsum(p[a] for p in partials) for a in range(3))
    value = max(math.fsum(axis_sums) / 3.0, 0.0)
    logger.info(
        f"λ 直接求和完成: {value:.6e} m⁻²s⁻¹，耗时 {time.perf_counter() - start:.2f}s"
    )
    return LambdaResult(value, LambdaMethod.VOXEL_DIRECT, _spacing_error(grid, r_c), axis_sums)


# =============================================================================
# 3. 卷积快速路径
# =============================================================================


def _sampled_kernel(grid: VoxelGrid, r_c: float) -> np.ndarray:
    cutoff2, scale = _cutoff_cells2(grid, r_c)
    n = int(math.floor(math.sqrt(cutoff2)))
    offsets = np.arange(-n, n + 1, dtype=np.int64)
    r2_int = (
        offsets[:, None, None] ** 2 + offsets[None, :, None] ** 2 + offsets[None, None, :] ** 2
    )
    norm = 1.0 / (2.0 * math.sqrt(math.pi) * r_c) ** 3
    return _kernel_from_r2(r2_int, cutoff2, scale, norm)


def lambda_voxel_convolution(
    grid: VoxelGrid, gamma_csl: float, r_c: float, max_workers: Optional[int] = None
) -> LambdaResult:
    """Σ_k ⟨∂_kϱ, G ⋆ ∂_kϱ⟩，卷积用 scipy.signal.fftconvolve"""
    _check_inputs(grid, gamma_csl, r_c)
    if gamma_csl == 0:
        return LambdaResult(0.0, LambdaMethod.VOXEL_CONVOLUTION, 0.0, (0.0, 0.0, 0.0))

    start = time.perf_counter()
    gradients = np.gradient(grid.densities, grid.spacing)
    kernel = _sampled_kernel(grid, r_c)
    block_rows = int(get_section("geometry").get("block_rows", 256))

    def run_axis(axis: int) -> float:
        g = gradients[axis]
        smeared = signal.fftconvolve(g, kernel, mode="same")
        product = g * smeared
        # 沿第一维分块求和后按块顺序 fsum
        return math.fsum(
            float(np.sum(product[s : s + block_rows])) for s in range(0, product.shape[0], block_rows)
        )

    workers = _resolve_workers(max_workers)
    with ThreadPoolExecutor(max_workers=min(workers, 3)) as executor:
        sums = list(executor.map(run_axis, range(3)))

    pref = _prefactor(gamma_csl, grid.spacing)
    axis_sums = tuple(pref * 3.0 * s for s in sums)
    value = max(math.fsum(axis_sums) / 3.0, 0.0)
    logger.info(
        f"λ 卷积完成: {value:.6e} m⁻²s⁻¹，核 {kernel.shape[0]}³，耗时 {time.perf_counter() - start:.2f}s"
    )
    # FFT 舍入误差远小于离散误差
    return LambdaResult(value, LambdaMethod.VOXEL_CONVOLUTION, _spacing_error(grid, r_c), axis_sums)
