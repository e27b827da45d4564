"""
CSL噪声谱数值平台 - 参数扫描

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》spectrum 模块

功能列表：
1. 可扫描参数注册表（每个参数映射为一次重新 derive）
2. 每行独立计算、线程池并行、按输入顺序输出
3. 行级错误写入 err 列，不中断扫描
4. polars CSV 输出
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import polars as pl

from common.contracts import CslSpectraError, NoiseModel, ParameterValidationError
from common.environment import default_worker_count
from models.stability import require_stable
from models.system import SystemParams, with_changes, with_Lambda, with_lambda_rate

from .area import QuadratureConfig, area_ratio
from .density import peak_value

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["param_value", "Lambda_rad_per_s", "area_ratio", "peak_value", "err"]


# =============================================================================
# 1. 参数注册表
# =============================================================================

SweepSetter = Callable[[SystemParams, float], SystemParams]

SWEEP_PARAMETERS: Dict[str, SweepSetter] = {
    "mass": lambda p, v: with_changes(p, mass=v),
    "Lambda": with_Lambda,
    "lambda_rate": with_lambda_rate,
    "gamma_csl": lambda p, v: with_changes(p, gamma_csl=v),
    "detuning": lambda p, v: with_changes(p, detuning=v),
    "detuning_over_kappa": lambda p, v: with_changes(p, detuning=v * p.cavity.kappa),
    "temperature": lambda p, v: with_changes(p, temperature=v),
    "power": lambda p, v: with_changes(p, power=v),
}


@dataclass(frozen=True)
class SweepSpec:
    """扫描描述"""

    param: str  # 参数名，见 SWEEP_PARAMETERS
    values: Sequence[float]  # 扫描值（保持输入顺序）
    observable: str = "area_ratio"  # "area_ratio" | "peak_value"
    noise_model: NoiseModel = NoiseModel.FULL_COTH

    def __post_init__(self):
        if self.param not in SWEEP_PARAMETERS:
            raise ParameterValidationError(
                "sweep.param", self.param, f"可选: {', '.join(SWEEP_PARAMETERS)}"
            )
        if self.observable not in ("area_ratio", "peak_value"):
            raise ParameterValidationError("sweep.observable", self.observable, "必须为 area_ratio 或 peak_value")
        values = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in values):
            raise ParameterValidationError("sweep.values", values, "必须为有限数")
        object.__setattr__(self, "values", values)


@dataclass
class SweepRow:
    """扫描结果的一行；失败行的数值列为 NaN"""

    param_value: float
    Lambda_rad_per_s: float = math.nan
    area_ratio: float = math.nan
    peak_value: float = math.nan
    err: str = ""

    @property
    def ok(self) -> bool:
        return not self.err


@dataclass
class SweepTable:
    """扫描结果表"""

    spec: SweepSpec
    rows: List[SweepRow] = field(default_factory=list)
    elapsed_s: float = 0.0

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "param_value": [r.param_value for r in self.rows],
                "Lambda_rad_per_s": [r.Lambda_rad_per_s for r in self.rows],
                "area_ratio": [r.area_ratio for r in self.rows],
                "peak_value": [r.peak_value for r in self.rows],
                "err": [r.err for r in self.rows],
            },
            schema={
                "param_value": pl.Float64,
                "Lambda_rad_per_s": pl.Float64,
                "area_ratio": pl.Float64,
                "peak_value": pl.Float64,
                "err": pl.Utf8,
            },
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().write_csv(path)
        logger.info(f"扫描结果已写出: {path} ({len(self.rows)} 行)")
        return path


# =============================================================================
# 2. 扫描执行
# =============================================================================


def _run_row(
    params: SystemParams,
    spec: SweepSpec,
    value: float,
    quadrature_cfg: Optional[QuadratureConfig],
    force: bool,
) -> SweepRow:
    row = SweepRow(param_value=value)
    try:
        point = SWEEP_PARAMETERS[spec.param](params, value)
        row.Lambda_rad_per_s = point.collapse.Lambda
        require_stable(point, force)
        row.peak_value = peak_value(point, spec.noise_model, force)
        if spec.observable == "area_ratio":
            row.area_ratio = area_ratio(point, quadrature_cfg, spec.noise_model, force=force).I
    except CslSpectraError as e:
        row.err = f"{type(e).__name__}: {e}"
        logger.warning(f"扫描行 {spec.param}={value!r} 失败: {row.err}")
    return row


def sweep(
    params: SystemParams,
    spec: SweepSpec,
    quadrature_cfg: Optional[QuadratureConfig] = None,
    max_workers: Optional[int] = None,
    force: bool = False,
) -> SweepTable:
    """逐值重新 derive 并计算观测量；行顺序与输入一致"""
    start = time.perf_counter()
    workers = max(1, int(max_workers) if max_workers else default_worker_count())
    logger.info(f"开始扫描 {spec.param}: {len(spec.values)} 个值, 观测量 {spec.observable}, 线程 {workers}")

    if not spec.values:
        return SweepTable(spec, [], 0.0)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(
            executor.map(lambda v: _run_row(params, spec, v, quadrature_cfg, force), spec.values)
        )

    elapsed = time.perf_counter() - start
    failed = sum(1 for r in rows if not r.ok)
    logger.info(f"扫描完成: {len(rows)} 行, 失败 {failed} 行, 耗时 {elapsed:.2f}s")
    return SweepTable(spec, rows, elapsed)
