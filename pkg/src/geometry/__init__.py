"""
CSL噪声谱数值平台 - 几何层

版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》geometry 模块

几何层，提供：
1. 质量分布（球体、长方体、体素网格）与栅格化
2. 坍缩速率 λ 的闭式解
3. 体素网格上的直接求和与卷积路径
4. 体素文件读写
"""

from .closed_forms import (
    LambdaMethod,
    LambdaResult,
    lambda_cuboid,
    lambda_for_body,
    lambda_sphere,
    lambda_sphere_exact,
    radial_lambda_sphere,
)
from .distributions import (
    Cuboid,
    Sphere,
    VoxelGrid,
    load_voxel_grid,
    rasterize_cuboid,
    rasterize_sphere,
    save_voxel_grid,
)
from .voxel import lambda_voxel_convolution, lambda_voxel_direct

__all__ = [
    "LambdaMethod",
    "LambdaResult",
    "lambda_cuboid",
    "lambda_for_body",
    "lambda_sphere",
    "lambda_sphere_exact",
    "radial_lambda_sphere",
    "Cuboid",
    "Sphere",
    "VoxelGrid",
    "load_voxel_grid",
    "rasterize_cuboid",
    "rasterize_sphere",
    "save_voxel_grid",
    "lambda_voxel_convolution",
    "lambda_voxel_direct",
]

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
__description__ = "Collapse-rate geometry: closed forms and voxel integrals"
