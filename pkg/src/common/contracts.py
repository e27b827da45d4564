"""
CSL噪声谱数值平台 - 核心数据契约

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》
适用范围：model / geometry / spectrum / langevin / cli 各模块间的数据传输和接口定义

统一的枚举、谱数据结构与异常体系，确保模块间数据传递的类型安全和一致性。
所有频率类量在内部一律以 rad/s 存储，单位换算只发生在配置与命令行边界。
"""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
import polars as pl


# =============================================================================
# 1. 基础枚举
# =============================================================================


class NoiseModel(str, Enum):
    """热噪声（及CSL力噪声）模型"""

    FULL_COTH = "full_coth"  # 完整 ω·coth(βω) 因子
    CLASSICAL_MARKOV = "classical_markov"  # 高温马尔可夫极限 2γ_m k_B T/(ħω)
    MARKOV_WHITE = "markov_white"  # 马尔可夫热噪声 + 白色CSL力（时域模拟器的精确谱）


class SpectrumKind(str, Enum):
    """谱类型"""

    DISPLACEMENT_FULL = "displacement_full"
    DISPLACEMENT_CLASSICAL_MARKOV = "displacement_classical_markov"
    DISPLACEMENT_MARKOV_WHITE = "displacement_markov_white"
    OUTPUT_QUADRATURE = "output_quadrature"
    MEASURED = "measured"  # Welch 估计


DISPLACEMENT_KINDS = {
    NoiseModel.FULL_COTH: SpectrumKind.DISPLACEMENT_FULL,
    NoiseModel.CLASSICAL_MARKOV: SpectrumKind.DISPLACEMENT_CLASSICAL_MARKOV,
    NoiseModel.MARKOV_WHITE: SpectrumKind.DISPLACEMENT_MARKOV_WHITE,
}


# =============================================================================
# 2. 谱数据契约
# =============================================================================


@dataclass
class Spectrum:
    """频率网格上的谱密度 - 模块间谱数据契约"""

    omegas: np.ndarray  # 频率网格 (rad/s)，严格递增
    values: np.ndarray  # 谱值 (位移谱 m²·s；输出谱无量纲)
    kind: SpectrumKind  # 谱类型
    params_fingerprint: str = ""  # SystemParams 指纹
    metadata: Dict[str, Any] = field(default_factory=dict)  # 附加信息

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.omegas.ndim != 1 or self.omegas.shape != self.values.shape:
            raise GridSpecError(
                f"网格与谱值形状不一致: {self.omegas.shape} vs {self.values.shape}"
            )
        if self.omegas.size > 1 and not np.all(np.diff(self.omegas) > 0):
            raise GridSpecError("频率网格必须严格递增")
        if np.any(self.values < 0):
            raise GridSpecError("谱密度必须非负")

    def __len__(self) -> int:
        return int(self.omegas.size)

    def to_frame(self) -> pl.DataFrame:
        """转换为 CSV 输出用的 polars 表"""
        return pl.DataFrame(
            {"omega_rad_per_s": self.omegas, "value": self.values},
            schema={"omega_rad_per_s": pl.Float64, "value": pl.Float64},
        )


# =============================================================================
# 3. 指纹工具
# =============================================================================


def _canonical(value: Any) -> Any:
    """浮点数用 float.hex 编码，保证逐位一致的指纹"""
    if isinstance(value, float):
        return value.hex()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


def fingerprint_of(payload: Dict[str, Any]) -> str:
    """计算任意参数字典的 SHA-256 指纹"""
    text = json.dumps(_canonical(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# =============================================================================
# 4. 异常定义
# =============================================================================


class CslSpectraError(Exception):
    """平台异常基类，exit_code 对应命令行退出码"""

    exit_code = 1


class ParameterValidationError(CslSpectraError):
    """物理参数验证异常"""

    exit_code = 2

    def __init__(self, field_name: str, value: Any, reason: str):
        self.field = field_name
        self.value = value
        self.reason = reason
        super().__init__(f"参数 {field_name}={value!r} 验证失败: {reason}")


class ConfigError(CslSpectraError):
    """配置文件/预设异常"""

    exit_code = 2

    def __init__(self, source: str, reason: str):
        self.source = source
        self.reason = reason
        super().__init__(f"配置 {source} 无效: {reason}")


class GridSpecError(CslSpectraError):
    """频率网格规格异常"""

    exit_code = 2


class SimConfigError(CslSpectraError):
    """模拟配置异常（步长门限、预热时长、分段参数）"""

    exit_code = 2

    def __init__(self, field_name: str, reason: str):
        self.field = field_name
        self.reason = reason
        super().__init__(f"模拟配置 {field_name} 无效: {reason}")


class EmptyBandError(CslSpectraError):
    """比较频带内没有频点"""

    exit_code = 2

    def __init__(self, band: Tuple[float, float]):
        self.band = band
        super().__init__(f"频带 [{band[0]:.6g}, {band[1]:.6g}] rad/s 内没有频点")


class AccuracyError(CslSpectraError):
    """体素间距超过精度门限"""

    exit_code = 3

    def __init__(self, spacing: float, limit: float):
        self.spacing = spacing
        self.limit = limit
        super().__init__(f"体素间距 h={spacing:.6g} m 超过精度门限 r_C/4={limit:.6g} m")


class PaddingError(CslSpectraError):
    """质量分布触及网格边界"""

    exit_code = 3

    def __init__(self, axis: int, side: str):
        self.axis = axis
        self.side = side
        super().__init__(f"质量分布触及网格边界: 轴 {axis} ({side})")


class QuadratureError(CslSpectraError):
    """积分未达到目标相对误差"""

    exit_code = 3

    def __init__(self, rel_error: float, target: float):
        self.rel_error = rel_error
        self.target = target
        super().__init__(f"积分相对误差 {rel_error:.3e} 未达到目标 {target:.1e}")


class StabilityError(CslSpectraError):
    """线性化系统不稳定"""

    exit_code = 4

    def __init__(self, max_real_part: float):
        self.max_real_part = max_real_part
        super().__init__(
            f"漂移矩阵存在非负实部本征值 (max Re={max_real_part:.6g} s⁻¹)，可用 --force 强制计算"
        )


class SpectrumEvaluationError(CslSpectraError):
    """谱分母下溢为零（参数恰好处于失稳点）"""

    exit_code = 4

    def __init__(self, omega: float):
        self.omega = omega
        super().__init__(f"谱分母在 ω={omega:.17g} rad/s 处为零")


class DivergenceError(CslSpectraError):
    """模拟发散"""

    exit_code = 4

    def __init__(self, realization: int, magnitude: Optional[float] = None, step: Optional[int] = None):
        self.realization = realization
        self.magnitude = magnitude
        self.step = step  # 检测时已完成的积分步数（含预热）
        super().__init__(f"第 {realization} 条实现在第 {step} 步发散 (|state|={magnitude})")


class ToleranceError(CslSpectraError):
    """模拟谱与解析谱偏差超过容差"""

    exit_code = 5

    def __init__(self, median: float, tolerance: float):
        self.median = median
        self.tolerance = tolerance
        super().__init__(f"中位相对偏差 {median:.4f} 超过容差 {tolerance:.4f}")


# =============================================================================
# 5. 版本信息
# =============================================================================

__version__ = "1.0.0"
