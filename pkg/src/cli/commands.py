"""
CSL噪声谱数值平台 - 子命令实现

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》cli 模块

功能列表：
1. RunConfig：参数来源（预设/配置文件）+ 覆盖项 + 输出设置
2. cmd_lambda / cmd_spectrum / cmd_area_ratio / cmd_sweep / cmd_simulate / cmd_presets
3. 运行元数据与可选 gnuplot 脚本
4. simulate --scheme auto 的积分格式选择

各命令接收 argparse.Namespace，返回退出码；领域错误以 CslSpectraError 抛出，由 main() 映射退出码。
"""

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import polars as pl

from common.config import get_section
from common.contracts import (
    NoiseModel,
    ParameterValidationError,
    SpectrumKind,
    ToleranceError,
    DISPLACEMENT_KINDS,
)
from common.settings import get_settings
from geometry.closed_forms import (
    LambdaResult,
    lambda_cuboid,
    lambda_for_body,
    lambda_sphere,
    lambda_sphere_exact,
    radial_lambda_sphere,
)
from geometry.distributions import load_voxel_grid
from geometry.voxel import lambda_voxel_convolution, lambda_voxel_direct
from langevin.psd import analytic_on_grid, compare_psd, ensemble_variance, welch_psd
from langevin.simulator import IntegratorScheme, SimConfig, simulate
from models.constants import R_C_DEFAULT, resolve_gamma
from models.inputs import ConfigFile, apply_overrides, parse_config_dict, read_config_dict
from models.stability import require_stable, stability_check
from models.system import SystemParams, derive, without_collapse
from spectrum.area import QuadratureConfig, analytic_variance, area_ratio
from spectrum.density import GridSpec, spectrum_grid
from spectrum.sweep import SweepSpec, sweep

from .output import RunRecord, emit_frame, write_metadata, write_plot_script
from .presets import PresetRegistry

logger = logging.getLogger(__name__)


# =============================================================================
# 1. 运行配置
# =============================================================================


@dataclass
class RunConfig:
    """一次命令运行的完整输入"""

    command: str
    source: str = ""  # "preset:<name>" 或配置文件路径
    config: Optional[ConfigFile] = None  # 已校验配置（含 grid / sweep 段）
    params: Optional[SystemParams] = None
    output: Optional[Path] = None
    plot_script: bool = False
    force: bool = False
    threads: Optional[int] = None
    flags: Dict[str, Any] = field(default_factory=dict)

    def record(self) -> RunRecord:
        record = RunRecord(command=self.command, flags=dict(self.flags))
        record.flags["parameter_source"] = self.source
        if self.params is not None:
            p = self.params
            record.params_fingerprint = p.fingerprint
            record.base_fingerprint = p.base_fingerprint
            record.params = p.inputs.to_config()
            record.derived = {
                "omega_c_rad_per_s": p.derived.omega_c,
                "chi_rad_per_s_m": p.derived.chi,
                "E_pump_per_s": p.derived.E_pump,
                "alpha_s": p.derived.alpha_s,
                "beta_s_per_rad": p.derived.beta,
                "lambda_per_m2_s": p.collapse.lambda_rate,
                "Lambda_rad_per_s": p.collapse.Lambda,
            }
        return record

    def finish(self, record: RunRecord, frame: pl.DataFrame, plot: Optional[Dict[str, Any]] = None) -> None:
        """写出结果表、元数据与绘图脚本"""
        path = emit_frame(frame, self.output)
        if path is None:
            return
        write_metadata(record, path)
        if self.plot_script and plot:
            write_plot_script(path, columns=frame.columns, **plot)


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k != "handler" and not callable(v)}


def load_parameters(
    args: argparse.Namespace, registry: Optional[PresetRegistry] = None
) -> Tuple[str, ConfigFile, SystemParams]:
    """解析参数来源与覆盖项并 derive"""
    if getattr(args, "config", None):
        path = Path(args.config)
        data = read_config_dict(path)
        source = str(path)
    else:
        registry = registry or PresetRegistry.from_settings()
        name = getattr(args, "preset", None) or get_settings().DEFAULT_PRESET
        data = registry.get(name).raw()
        source = f"preset:{name}"

    overrides: List[str] = list(getattr(args, "set", None) or [])
    if getattr(args, "mass", None) is not None:
        overrides.append(f"mirror.mass_kg={args.mass!r}")
    if getattr(args, "detuning_over_kappa", None) is not None:
        overrides.append(f"cavity.detuning_over_kappa={args.detuning_over_kappa!r}")
    if overrides:
        data = apply_overrides(data, overrides)

    config = parse_config_dict(data, source)
    params = derive(config.to_raw_inputs())
    if getattr(args, "no_csl", False):
        params = without_collapse(params)
    logger.info(
        f"参数来源 {source}: m={params.mirror.mass:.4g} kg, Δ/κ={params.cavity.detuning / params.cavity.kappa:.4g}, "
        f"Λ={params.collapse.Lambda:.6g} rad/s"
    )
    return source, config, params


def build_run_config(
    args: argparse.Namespace, registry: Optional[PresetRegistry] = None, with_params: bool = True
) -> RunConfig:
    run = RunConfig(
        command=args.command,
        output=Path(args.output) if getattr(args, "output", None) else None,
        plot_script=bool(getattr(args, "plot_script", False)),
        force=bool(getattr(args, "force", False)),
        threads=getattr(args, "threads", None) or get_settings().THREADS,
        flags=_flags(args),
    )
    if with_params:
        run.source, run.config, run.params = load_parameters(args, registry)
    return run


# =============================================================================
# 2. lambda
# =============================================================================


def parse_key_values(items: Sequence[str], required: Sequence[str], flag: str) -> Dict[str, float]:
    """解析 KEY=VALUE 列表（值为浮点数）"""
    values: Dict[str, float] = {}
    for item in items:
        if "=" not in item:
            raise ParameterValidationError(flag, item, "需要 KEY=VALUE 形式")
        key, raw = item.split("=", 1)
        key = key.strip()
        if key not in required:
            raise ParameterValidationError(flag, item, f"未知键 {key!r}，可选 {list(required)}")
        try:
            values[key] = float(raw)
        except ValueError:
            raise ParameterValidationError(flag, item, "值必须为数") from None
    missing = [k for k in required if k not in values]
    if missing:
        raise ParameterValidationError(flag, list(items), f"缺少 {missing}")
    return values


SPHERE_FORMS: Dict[str, Callable[..., LambdaResult]] = {
    "published": lambda_sphere,
    "exact": lambda_sphere_exact,
    "radial": radial_lambda_sphere,
}


def _explicit_lambda(args: argparse.Namespace, gamma: float, r_c: float, threads: Optional[int]) -> Tuple[LambdaResult, float]:
    """显式几何输入：返回 (结果, 质量 kg)"""
    if args.sphere:
        kv = parse_key_values(args.sphere, ("R", "m"), "--sphere")
        return SPHERE_FORMS[args.sphere_form](kv["R"], kv["m"], gamma, r_c), kv["m"]
    if args.cuboid:
        kv = parse_key_values(args.cuboid, ("a", "b", "c", "m"), "--cuboid")
        return lambda_cuboid(kv["a"], kv["b"], kv["c"], kv["m"], gamma, r_c), kv["m"]
    grid = load_voxel_grid(Path(args.voxel))
    method = lambda_voxel_direct if args.method == "direct" else lambda_voxel_convolution
    mass = grid.declared_mass if grid.declared_mass is not None else grid.total_mass
    return method(grid, gamma, r_c, max_workers=threads), mass


def cmd_lambda(args: argparse.Namespace) -> int:
    """坍缩速率 λ（及给定机械频率时的 Λ）"""
    start = time.perf_counter()
    explicit = bool(args.sphere or args.cuboid or args.voxel)
    run = build_run_config(args, with_params=not explicit)

    if explicit:
        gamma = resolve_gamma(args.gamma) if args.gamma is not None else None
        if gamma is None:
            raise ParameterValidationError("--gamma", None, "显式几何输入需要 --gamma (grw | adler | m³/s)")
        r_c = args.r_c if args.r_c is not None else R_C_DEFAULT
        result, mass = _explicit_lambda(args, gamma, r_c, run.threads)
        omega_m = args.omega_m
    else:
        p = run.params
        gamma = resolve_gamma(args.gamma) if args.gamma is not None else p.inputs.gamma_csl
        r_c = args.r_c if args.r_c is not None else p.inputs.r_c
        mass = p.mirror.mass
        result = lambda_for_body(p.inputs.body, mass, gamma, r_c)
        omega_m = args.omega_m if args.omega_m is not None else p.mirror.omega_m

    Lambda = result.Lambda(mass, omega_m) if omega_m else math.nan
    axes = result.axis_rates or (math.nan,) * 3
    frame = pl.DataFrame(
        {
            "method": [result.method.value],
            "lambda_per_m2_s": [result.lambda_rate],
            "Lambda_rad_per_s": [Lambda],
            "est_rel_error": [result.est_rel_error],
            "lambda_x": [axes[0]],
            "lambda_y": [axes[1]],
            "lambda_z": [axes[2]],
        }
    )
    logger.info(
        f"λ = {result.lambda_rate:.6e} m⁻²s⁻¹ ({result.method.value}, 估计误差 {result.est_rel_error:.2e})"
        + (f", Λ = {Lambda:.6e} rad/s" if omega_m else "")
    )

    record = run.record()
    record.results = {
        "lambda_per_m2_s": result.lambda_rate,
        "Lambda_rad_per_s": Lambda,
        "method": result.method.value,
        "est_rel_error": result.est_rel_error,
        "gamma_csl_m3_per_s": gamma,
        "r_c_m": r_c,
        "mass_kg": mass,
    }
    record.timings = {"total_s": time.perf_counter() - start}
    run.finish(record, frame)
    return 0


# =============================================================================
# 3. spectrum / area-ratio
# =============================================================================


def _default_grid(params: SystemParams) -> GridSpec:
    wm = params.mirror.omega_m
    return GridSpec.linear(-2.0 * wm, 2.0 * wm, 4001)


def resolve_grid(args: argparse.Namespace, config: ConfigFile, params: SystemParams) -> GridSpec:
    """逐字段合并：命令行优先，其次配置文件 grid 段（网格类型相同时），最后默认 ±2ω_m"""
    base = config.grid
    kind = args.grid or (base.kind if base is not None else "linear")
    if base is not None and base.kind != kind:
        base = None
    default = _default_grid(params)

    def pick(flag, field, fallback):
        if flag is not None:
            return flag
        if base is not None:
            return getattr(base, field)
        return fallback

    omega_max = pick(args.omega_max, "omega_max_rad_per_s", default.omega_max)
    points = pick(args.points, "points", default.points)
    if kind == "linear":
        omega_min = pick(args.omega_min, "omega_min_rad_per_s", -omega_max)
        return GridSpec.linear(omega_min, omega_max, points)
    omega_min = pick(args.omega_min, "omega_min_rad_per_s", 1e-3 * omega_max)
    include_zero = not args.no_zero and (base.include_zero if base is not None else True)
    return GridSpec.log_symmetric(omega_min, omega_max, points, include_zero=include_zero)


def cmd_spectrum(args: argparse.Namespace) -> int:
    """频率网格上的位移谱（或 --output-field 时的输出正交分量谱）"""
    start = time.perf_counter()
    run = build_run_config(args)
    params = run.params
    grid = resolve_grid(args, run.config, params)
    if args.output_field:
        kind = SpectrumKind.OUTPUT_QUADRATURE
    else:
        kind = DISPLACEMENT_KINDS[NoiseModel(args.noise_model)]

    result = spectrum_grid(params, grid, kind, force=run.force)
    frame = result.to_frame()

    record = run.record()
    record.results = {"kind": kind.value, "grid": grid.to_dict(), "points": len(result)}
    record.timings = {"total_s": time.perf_counter() - start}
    run.finish(
        record,
        frame,
        {
            "x_column": "omega_rad_per_s",
            "y_columns": ["value"],
            "xlabel": "omega (rad/s)",
            "ylabel": "S_yout" if args.output_field else "S (m^2 s)",
            "logscale_y": True,
        },
    )
    return 0


def cmd_area_ratio(args: argparse.Namespace) -> int:
    """谱面积比 I"""
    start = time.perf_counter()
    run = build_run_config(args)
    params = run.params
    result = area_ratio(
        params,
        QuadratureConfig.from_app_config(),
        NoiseModel(args.noise_model),
        observable=args.observable,
        force=run.force,
    )
    frame = pl.DataFrame(
        {
            "Lambda_rad_per_s": [params.collapse.Lambda],
            "area_ratio": [result.I],
            "abs_area_csl": [result.abs_area_csl],
            "abs_area_thermal": [result.abs_area_thermal],
            "quadrature_rel_err": [result.quadrature_rel_err],
            "omega_max_rad_per_s": [result.omega_max],
        }
    )
    record = run.record()
    record.results = {
        "area_ratio": result.I,
        "quadrature_rel_err": result.quadrature_rel_err,
        "noise_model": result.noise_model.value,
        "observable": result.observable,
    }
    record.timings = {"total_s": time.perf_counter() - start}
    run.finish(record, frame)
    return 0


# =============================================================================
# 4. sweep
# =============================================================================


def resolve_sweep(args: argparse.Namespace, config: ConfigFile) -> SweepSpec:
    section = config.sweep
    param = args.param or (section.param if section else None)
    if param is None:
        raise ParameterValidationError("--param", None, "需要 --param 或配置文件 sweep 段")

    if args.values is not None:
        values = list(args.values)
    elif args.linspace is not None:
        lo, hi, n = args.linspace
        values = list(np.linspace(lo, hi, int(n)))
    elif args.logspace is not None:
        lo, hi, n = args.logspace
        if lo <= 0 or hi <= 0:
            raise ParameterValidationError("--logspace", args.logspace, "端点必须为正")
        values = list(np.geomspace(lo, hi, int(n)))
    elif section is not None and section.param == param:
        values = list(section.values)
    else:
        values = []

    observable = args.observable or (section.observable if section else "area_ratio")
    return SweepSpec(param, values, observable, NoiseModel(args.noise_model))


def cmd_sweep(args: argparse.Namespace) -> int:
    """参数扫描，逐行输出面积比与峰值"""
    run = build_run_config(args)
    spec = resolve_sweep(args, run.config)
    table = sweep(
        run.params, spec, QuadratureConfig.from_app_config(), max_workers=run.threads, force=run.force
    )
    frame = table.to_frame()

    record = run.record()
    record.results = {
        "param": spec.param,
        "observable": spec.observable,
        "rows": len(table),
        "failed_rows": sum(1 for r in table.rows if not r.ok),
    }
    record.timings = {"total_s": table.elapsed_s}
    run.finish(
        record,
        frame,
        {
            "x_column": "param_value",
            "y_columns": [spec.observable],
            "xlabel": spec.param,
            "ylabel": spec.observable,
        },
    )
    return 0


# =============================================================================
# 5. simulate
# =============================================================================


def _default_dt(scheme: IntegratorScheme, params: SystemParams) -> float:
    sim = get_section("simulation")
    if scheme == IntegratorScheme.EXACT_PROPAGATOR:
        return 2.0 * math.pi / (sim.get("samples_per_period", 16) * params.mirror.omega_m)
    radius = stability_check(params).spectral_radius
    return sim.get("heun_safety", 0.5) * sim.get("resolution_gate", 0.1) / radius


def choose_scheme(
    params: SystemParams, requested: str, dt: Optional[float], total_time: float
) -> Tuple[IntegratorScheme, float]:
    """auto：步长门限与步数上限允许时用随机 Heun，否则用精确传播子"""
    if requested != "auto":
        scheme = IntegratorScheme(requested)
        return scheme, dt if dt is not None else _default_dt(scheme, params)

    sim = get_section("simulation")
    heun_dt = dt if dt is not None else _default_dt(IntegratorScheme.STOCHASTIC_HEUN, params)
    within_gate = heun_dt * stability_check(params).spectral_radius < sim.get("resolution_gate", 0.1)
    steps = total_time / heun_dt
    if within_gate and steps <= sim.get("max_steps", 2_000_000):
        scheme, chosen = IntegratorScheme.STOCHASTIC_HEUN, heun_dt
    else:
        scheme = IntegratorScheme.EXACT_PROPAGATOR
        chosen = dt if dt is not None else _default_dt(scheme, params)
    logger.info(f"自动选择积分格式: {scheme.value}, dt = {chosen:.4g} s (Heun 需 {steps:.3g} 步)")
    return scheme, chosen


def default_duration(params: SystemParams) -> float:
    """Welch 分辨率 resolution_fraction·ω_m、segments 段 50% 重叠所需时长"""
    welch = get_section("welch")
    segment_time = 2.0 * math.pi / (welch.get("resolution_fraction", 0.0025) * params.mirror.omega_m)
    return 0.5 * (welch.get("segments", 8) + 1) * segment_time


def build_sim_config(args: argparse.Namespace, params: SystemParams, threads: Optional[int]) -> SimConfig:
    sim = get_section("simulation")
    burn_in = args.burn_in if args.burn_in is not None else sim.get("burn_in_damping_times", 5.0) / params.mirror.gamma_m
    duration = args.duration if args.duration is not None else default_duration(params)
    scheme, dt = choose_scheme(params, args.scheme, args.dt, burn_in + duration)
    return SimConfig(
        dt=dt,
        duration=duration,
        n_realizations=args.realizations if args.realizations is not None else sim.get("default_realizations", 200),
        seed=args.seed,
        burn_in=burn_in,
        scheme=scheme,
        thin=args.thin,
        noise_gains=tuple(args.noise_gains) if args.noise_gains else (1.0, 1.0, 1.0, 1.0),
        initial=args.initial,
        max_workers=threads,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    """蒙特卡洛模拟 → Welch 功率谱；--validate 时与解析谱比较"""
    start = time.perf_counter()
    run = build_run_config(args)
    params = run.params
    require_stable(params, run.force)
    config = build_sim_config(args, params, run.threads)

    ensemble = simulate(params, config, force=run.force)
    measured = welch_psd(ensemble, segment_length=args.segment_length)
    variance, stderr = ensemble_variance(ensemble)
    if args.trace_output:
        ensemble.to_trace_csv(Path(args.trace_output))

    record = run.record()
    record.results = {
        "scheme_requested": args.scheme,
        "scheme": config.scheme.value,
        "sim_config": config.to_dict(),
        "config_fingerprint": config.fingerprint,
        "variance_m2": variance,
        "variance_stderr_m2": stderr,
        "welch": measured.metadata,
    }
    record.timings = {"simulate_s": ensemble.metadata.get("elapsed_s", 0.0)}

    failure: Optional[ToleranceError] = None
    if args.validate:
        if any(g != 1.0 for g in config.noise_gains):
            logger.warning("噪声增益不为 1，解析参考谱未按增益缩放")
        wm = params.mirror.omega_m
        band = tuple(args.band) if args.band else (0.5 * wm, 2.0 * wm)
        reference = analytic_on_grid(params, measured.omegas, NoiseModel.MARKOV_WHITE)
        report = compare_psd(measured, reference, band, args.tol)
        expected = analytic_variance(params, NoiseModel.MARKOV_WHITE, force=run.force)
        record.results["comparison"] = {
            "band_rad_per_s": list(report.band),
            "n_bins": report.n_bins,
            "median_rel_dev": report.median_rel_dev,
            "max_rel_dev": report.max_rel_dev,
            "peak_abs_dev_omega": report.peak_abs_dev_omega,
            "tolerance": report.tolerance,
            "passed": report.passed,
            "analytic_variance_m2": expected,
            "variance_ratio": variance / expected if expected else math.nan,
        }
        if not report.passed:
            failure = ToleranceError(report.median_rel_dev, report.tolerance)
            record.exit_status = failure.exit_code

    record.timings["total_s"] = time.perf_counter() - start
    run.finish(
        record,
        measured.to_frame(),
        {
            "x_column": "omega_rad_per_s",
            "y_columns": ["value"],
            "xlabel": "omega (rad/s)",
            "ylabel": "S (m^2 s)",
            "logscale_y": True,
        },
    )
    if failure is not None:
        raise failure
    return 0


# =============================================================================
# 6. presets
# =============================================================================


def cmd_presets(args: argparse.Namespace) -> int:
    """列出可用预设及其出处"""
    registry = PresetRegistry.from_settings()
    rows = []
    for preset in registry.all():
        rows.append(
            {
                "name": preset.name,
                "origin": "shipped" if preset.shipped else "user",
                "provenance": " ".join(preset.provenance.split()),
                "path": str(preset.path),
            }
        )
    frame = pl.DataFrame(
        rows, schema={"name": pl.Utf8, "origin": pl.Utf8, "provenance": pl.Utf8, "path": pl.Utf8}
    )
    if getattr(args, "output", None):
        emit_frame(frame, Path(args.output))
    else:
        for row in rows:
            sys.stdout.write(f"{row['name']:<16} {row['origin']:<8} {row['provenance']}\n")
        sys.stdout.flush()
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "lambda": cmd_lambda,
    "spectrum": cmd_spectrum,
    "area-ratio": cmd_area_ratio,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "presets": cmd_presets,
}
