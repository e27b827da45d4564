"""
CSL噪声谱数值平台 - 质量分布

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》geometry 模块、docs/voxel_format.md

功能列表：
1. 均匀球体 Sphere、均匀长方体 Cuboid
2. 体素网格 VoxelGrid（总质量、90°旋转、边界检查）
3. 球体/长方体栅格化（表面体素超采样，严格保持声明质量）
4. 体素文件读写（.npz）
"""

import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from common.config import get_section
from common.contracts import ConfigError, PaddingError, ParameterValidationError
from models.constants import R_C_DEFAULT

logger = logging.getLogger(__name__)


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0:
        raise ParameterValidationError(name, value, "必须为有限正数")


# =============================================================================
# 1. 解析质量分布
# =============================================================================


@dataclass(frozen=True)
class Sphere:
    """均匀球体"""

    radius: float  # m
    mass: float  # kg

    def __post_init__(self):
        _require_positive("sphere.radius", self.radius)
        _require_positive("sphere.mass", self.mass)

    @property
    def density(self) -> float:
        return self.mass / (4.0 / 3.0 * math.pi * self.radius**3)


@dataclass(frozen=True)
class Cuboid:
    """均匀长方体，边沿坐标轴"""

    a: float  # m
    b: float  # m
    c: float  # m
    mass: float  # kg

    def __post_init__(self):
        for name, value in (("cuboid.a", self.a), ("cuboid.b", self.b), ("cuboid.c", self.c)):
            _require_positive(name, value)
        _require_positive("cuboid.mass", self.mass)

    @property
    def edges(self) -> Tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def density(self) -> float:
        return self.mass / (self.a * self.b * self.c)


# =============================================================================
# 2. 体素网格
# =============================================================================


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """均匀立方体素上的密度场

    origin 为体素 (0, 0, 0) 中心坐标；densities 按 C 顺序存储，单位 kg/m³。
    """

    origin: Tuple[float, float, float]  # m
    spacing: float  # m
    densities: np.ndarray  # kg/m³
    declared_mass: Optional[float] = None  # kg，给定时校验 h³Σϱ

    def __post_init__(self):
        densities = np.ascontiguousarray(self.densities, dtype=float)
        object.__setattr__(self, "densities", densities)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))

        if densities.ndim != 3 or min(densities.shape) < 3:
            raise ParameterValidationError("voxel.densities", densities.shape, "需要每维至少 3 个体素的三维数组")
        if len(self.origin) != 3 or not all(math.isfinite(v) for v in self.origin):
            raise ParameterValidationError("voxel.origin", self.origin, "需要 3 个有限坐标")
        _require_positive("voxel.spacing", self.spacing)
        if not np.all(np.isfinite(densities)) or np.any(densities < 0):
            raise ParameterValidationError("voxel.densities", "...", "密度必须为有限非负数")

        total = self.total_mass
        if total <= 0:
            raise ParameterValidationError("voxel.total_mass", total, "总质量必须为正")
        if self.declared_mass is not None:
            _require_positive("voxel.declared_mass", self.declared_mass)
            if abs(total - self.declared_mass) > 1e-12 * self.declared_mass:
                raise ParameterValidationError(
                    "voxel.declared_mass",
                    self.declared_mass,
                    f"与 h³Σϱ = {total!r} 不一致（相对容差 1e-12）",
                )

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.densities.shape

    @property
    def total_mass(self) -> float:
        """h³·Σϱ"""
        return self.spacing**3 * math.fsum(self.densities.ravel())

    def rotated90(self, axis: int, k: int = 1) -> "VoxelGrid":
        """绕坐标轴旋转 k×90°（平移不影响 λ，原点保持不变）"""
        if axis not in (0, 1, 2):
            raise ParameterValidationError("axis", axis, "必须为 0、1 或 2")
        plane = tuple(a for a in range(3) if a != axis)
        rotated = np.rot90(self.densities, k=k, axes=plane)
        return VoxelGrid(self.origin, self.spacing, rotated, self.declared_mass)

    def shifted(self, offset: Tuple[float, float, float]) -> "VoxelGrid":
        origin = tuple(o + d for o, d in zip(self.origin, offset))
        return VoxelGrid(origin, self.spacing, self.densities, self.declared_mass)

    def check_padding(self) -> None:
        """密度触及最外层体素时抛出 PaddingError"""
        rho = self.densities
        for axis in range(3):
            low = np.take(rho, 0, axis=axis)
            high = np.take(rho, -1, axis=axis)
            if np.any(low != 0):
                raise PaddingError(axis, "low")
            if np.any(high != 0):
                raise PaddingError(axis, "high")


# =============================================================================
# 3. 栅格化
# =============================================================================


def _centered_axis(half_width: float, spacing: float) -> Tuple[int, float]:
    """覆盖 [-half_width, half_width] 的体素数（奇数，中心体素位于原点）及首体素中心坐标"""
    half_cells = int(math.ceil(half_width / spacing)) + 1
    n = 2 * half_cells + 1
    return n, -half_cells * spacing


def _resolve_padding(padding: Optional[float], r_c: float) -> float:
    if padding is None:
        padding = get_section("geometry").get("default_padding_radii", 4.0) * r_c
    if not math.isfinite(padding) or padding < 0:
        raise ParameterValidationError("padding", padding, "必须为有限非负数")
    return padding


def rasterize_sphere(
    sphere: Sphere,
    spacing: float,
    r_c: float = R_C_DEFAULT,
    padding: Optional[float] = None,
    supersampling: Optional[int] = None,
) -> VoxelGrid:
    """均匀球体栅格化；仅跨越球面的体素做 s³ 超采样"""
    _require_positive("spacing", spacing)
    padding = _resolve_padding(padding, r_c)
    s = int(supersampling or get_section("geometry").get("supersampling", 8))

    n, first = _centered_axis(sphere.radius + padding, spacing)
    coords = first + spacing * np.arange(n)
    X, Y, Z = np.meshgrid(coords, coords, coords, indexing="ij")
    dist = np.sqrt(X**2 + Y**2 + Z**2)

    half_diag = 0.5 * math.sqrt(3.0) * spacing
    occupancy = (dist + half_diag <= sphere.radius).astype(float)
    surface = np.abs(dist - sphere.radius) < half_diag

    # 表面体素：子体素中心计数
    sx, sy, sz = X[surface], Y[surface], Z[surface]
    offsets = (np.arange(s) + 0.5) / s - 0.5
    inside = np.zeros(sx.size)
    r2 = sphere.radius**2
    for ox, oy, oz in itertools.product(offsets, repeat=3):
        px = sx + ox * spacing
        py = sy + oy * spacing
        pz = sz + oz * spacing
        inside += (px * px + py * py + pz * pz) <= r2
    occupancy[surface] = inside / s**3

    densities = occupancy * (sphere.mass / (spacing**3 * math.fsum(occupancy.ravel())))
    logger.debug(f"球体栅格化: {n}³ 体素, 表面体素 {sx.size}, 超采样 {s}³")
    return VoxelGrid((first, first, first), spacing, densities, sphere.mass)


def _overlap_1d(coords: np.ndarray, spacing: float, low: float, high: float) -> np.ndarray:
    """每个体素沿一轴与 [low, high] 的重叠比例"""
    left = coords - 0.5 * spacing
    right = coords + 0.5 * spacing
    return np.clip(np.minimum(right, high) - np.maximum(left, low), 0.0, None) / spacing


def rasterize_cuboid(
    cuboid: Cuboid,
    spacing: float,
    r_c: float = R_C_DEFAULT,
    padding: Optional[float] = None,
) -> VoxelGrid:
    """均匀长方体栅格化（以原点为中心），占据比例按轴精确可分"""
    _require_positive("spacing", spacing)
    padding = _resolve_padding(padding, r_c)

    axes = []
    firsts = []
    for edge in cuboid.edges:
        n, first = _centered_axis(0.5 * edge + padding, spacing)
        coords = first + spacing * np.arange(n)
        axes.append(_overlap_1d(coords, spacing, -0.5 * edge, 0.5 * edge))
        firsts.append(first)

    occupancy = axes[0][:, None, None] * axes[1][None, :, None] * axes[2][None, None, :]
    densities = occupancy * (cuboid.mass / (spacing**3 * math.fsum(occupancy.ravel())))
    return VoxelGrid(tuple(firsts), spacing, densities, cuboid.mass)


# =============================================================================
# 4. 文件读写
# =============================================================================

_REQUIRED_KEYS = ("dims", "spacing", "origin", "densities")


def save_voxel_grid(grid: VoxelGrid, path: Union[str, Path]) -> Path:
    """写出 .npz 体素文件"""
    path = Path(path)
    payload = {
        "dims": np.asarray(grid.shape, dtype=np.int64),
        "spacing": np.float64(grid.spacing),
        "origin": np.asarray(grid.origin, dtype=float),
        "densities": grid.densities.ravel(order="C"),
    }
    if grid.declared_mass is not None:
        payload["declared_mass_kg"] = np.float64(grid.declared_mass)
    with path.open("wb") as f:
        np.savez(f, **payload)
    logger.info(f"体素文件已写出: {path}")
    return path


def load_voxel_grid(path: Union[str, Path]) -> VoxelGrid:
    """读取 .npz 体素文件；格式错误抛出 ConfigError"""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            missing = [k for k in _REQUIRED_KEYS if k not in data.files]
            if missing:
                raise ConfigError(str(path), f"缺少数组: {missing}")
            dims = tuple(int(v) for v in np.asarray(data["dims"]).ravel())
            spacing = float(data["spacing"])
            origin = tuple(float(v) for v in np.asarray(data["origin"]).ravel())
            flat = np.asarray(data["densities"], dtype=float).ravel()
            declared = float(data["declared_mass_kg"]) if "declared_mass_kg" in data.files else None
    except FileNotFoundError as e:
        raise ConfigError(str(path), "文件不存在") from e
    except (OSError, ValueError) as e:
        raise ConfigError(str(path), f"无法读取体素文件: {e}") from e

    if len(dims) != 3 or int(np.prod(dims)) != flat.size:
        raise ConfigError(str(path), f"dims={dims} 与 densities 长度 {flat.size} 不一致")
    return VoxelGrid(origin, spacing, flat.reshape(dims, order="C"), declared)
