#!/usr/bin/env python3
"""
CSL噪声谱数值平台 - 命令行入口

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》cli 模块
技术栈：Python 3.9+ + NumPy/SciPy + Polars

命令行主入口，负责：
1. 命令行参数解析（子命令 lambda / spectrum / area-ratio / sweep / simulate / presets）
2. 环境检查和依赖版本验证
3. 日志系统初始化
4. 子命令分发与退出码映射（0 成功, 2 校验, 3 精度, 4 稳定性, 5 容差, 1 其它）
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# 添加src目录到Python路径
PROJECT_ROOT = Path(__file__).parent
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

try:
    from cli.commands import COMMANDS
    from common.contracts import CslSpectraError, NoiseModel, ParameterValidationError
    from common.environment import EnvironmentChecker, setup_logging
    from common.settings import get_settings
    from spectrum.sweep import SWEEP_PARAMETERS
except ImportError as e:
    print(f"❌ 导入模块失败: {e}", file=sys.stderr)
    print("请确保已安装所有依赖: pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)

NOISE_MODELS = [m.value for m in NoiseModel]


# =============================================================================
# 参数解析
# =============================================================================


def _parameter_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("参数来源")
    source = group.add_mutually_exclusive_group()
    source.add_argument("--preset", type=str, help="预设名称（默认取 CSLSPEC_DEFAULT_PRESET）")
    source.add_argument("--config", type=str, help="YAML 配置文件路径")
    group.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY.PATH=VALUE",
        help="覆盖配置项，语法同配置文件，可重复（例: cavity.power_w=2e-3）",
    )
    group.add_argument("--mass", type=float, help="镜子质量 (kg)，同时作为坍缩体质量")
    group.add_argument("--detuning-over-kappa", type=float, help="失谐 Δ/κ（无量纲）")
    group.add_argument("--no-csl", action="store_true", help="γ=0（Λ=0）的配对运行")
    group.add_argument("--force", action="store_true", help="线性化系统不稳定时仍强制计算")
    return parent


def _output_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("输出")
    group.add_argument("--output", "-o", type=str, help="CSV 输出路径（省略时写到标准输出）")
    group.add_argument("--plot-script", action="store_true", help="同时写出 gnuplot 脚本 <output>.gp")
    return parent


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """解析命令行参数"""
    parser = argparse.ArgumentParser(
        prog="csl-spectra",
        description="受驱光力腔中 CSL 坍缩噪声的谱计算与蒙特卡洛验证",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  csl-spectra presets
  csl-spectra lambda --sphere R=1e-7 m=15e-12 --gamma adler
  csl-spectra spectrum --preset fig2a_15ng -o csl.csv
  csl-spectra spectrum --preset fig2a_15ng --no-csl -o thermal.csv
  csl-spectra area-ratio --preset fig2b --mass 15e-12
  csl-spectra sweep --preset fig2b -o fig2b.csv --plot-script
  csl-spectra simulate --preset fig2a_15ng --no-csl --validate --tol 0.10

退出码: 0 成功, 2 参数/配置错误, 3 精度门限, 4 稳定性/发散, 5 验证容差未通过, 1 其它错误
        """,
    )
    parser.add_argument("--debug", action="store_true", help="启用调试模式（详细日志、错误堆栈跟踪）")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="设置日志级别 (default: CSLSPEC_LOG_LEVEL 或 INFO)",
    )
    parser.add_argument("--log-dir", type=str, help="日志目录（写入 app.log / error.log）")
    parser.add_argument("--threads", type=int, help="最大工作线程数（整数 ≥ 1，不影响结果）")
    parser.add_argument("--skip-env-check", action="store_true", help="跳过运行环境检查")
    parser.add_argument("--version", action="version", version="csl-spectra v1.0.0")

    params = _parameter_parent()
    output = _output_parent()
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # lambda
    p = sub.add_parser(
        "lambda",
        parents=[params, output],
        help="坍缩速率 λ (m⁻²s⁻¹) 与 Λ (rad/s)",
        description="计算坍缩速率 λ；给定机械频率时同时给出 Λ = λħ/(mω_m)。无几何参数时使用预设的坍缩体。",
    )
    geometry = p.add_mutually_exclusive_group()
    geometry.add_argument("--sphere", nargs="+", metavar="KEY=VALUE", help="均匀球: R=半径 (m) m=质量 (kg)")
    geometry.add_argument(
        "--cuboid", nargs="+", metavar="KEY=VALUE", help="均匀长方体: a= b= c= 边长 (m) m=质量 (kg)"
    )
    geometry.add_argument("--voxel", type=str, help="体素文件 (.npz，密度 kg/m³、间距 m)")
    p.add_argument(
        "--sphere-form",
        choices=["published", "exact", "radial"],
        default="published",
        help="球体公式: 发表闭式 / 精确闭式 / 径向积分 (default: published)",
    )
    p.add_argument(
        "--method", choices=["direct", "convolution"], default="convolution", help="体素求和路径 (default: convolution)"
    )
    p.add_argument("--gamma", type=str, help="坍缩强度 γ: grw | adler | 数值 (m³/s)")
    p.add_argument("--r-c", type=float, help="坍缩长度 r_C (m, default: 1e-7)")
    p.add_argument("--omega-m", type=float, help="机械角频率 ω_m (rad/s)，用于换算 Λ")
    p.set_defaults(handler=COMMANDS["lambda"])

    # spectrum
    p = sub.add_parser(
        "spectrum",
        parents=[params, output],
        help="频率网格上的位移噪声谱 S(ω) (m²·s)",
        description="在频率网格上计算 S(ω)；--output-field 时计算无量纲输出正交分量谱 S_yout。",
    )
    p.add_argument("--grid", choices=["linear", "log_symmetric"], help="网格类型 (default: 配置文件 grid 段或 linear)")
    p.add_argument("--omega-min", type=float, help="网格下限 (rad/s)；log_symmetric 时为最小正频率")
    p.add_argument("--omega-max", type=float, help="网格上限 (rad/s, default: 2ω_m)")
    p.add_argument("--points", type=int, help="点数（log_symmetric 为每侧点数，default: 4001）")
    p.add_argument("--no-zero", action="store_true", help="log_symmetric 网格不含 ω=0")
    p.add_argument("--noise-model", choices=NOISE_MODELS, default="full_coth", help="热噪声模型 (default: full_coth)")
    p.add_argument("--output-field", action="store_true", help="输出 S_yout（散粒噪声归一为 1）")
    p.set_defaults(handler=COMMANDS["spectrum"])

    # area-ratio
    p = sub.add_parser(
        "area-ratio",
        parents=[params, output],
        help="谱面积比 I = ∫S dω / ∫S_{Λ=0} dω（无量纲）",
    )
    p.add_argument("--noise-model", choices=NOISE_MODELS, default="full_coth", help="热噪声模型 (default: full_coth)")
    p.add_argument(
        "--observable",
        choices=["displacement", "output"],
        default="displacement",
        help="积分对象: 位移谱 S 或 S_yout − 1 (default: displacement)",
    )
    p.set_defaults(handler=COMMANDS["area-ratio"])

    # sweep
    p = sub.add_parser(
        "sweep",
        parents=[params, output],
        help="参数扫描（面积比 / 峰值）",
        description=(
            "逐值重新计算观测量。参数单位: mass (kg), Lambda (rad/s), lambda_rate (m⁻²s⁻¹), "
            "gamma_csl (m³/s), detuning (rad/s), detuning_over_kappa (无量纲), temperature (K), power (W)。"
        ),
    )
    p.add_argument("--param", choices=list(SWEEP_PARAMETERS), help="扫描参数 (default: 配置文件 sweep 段)")
    values = p.add_mutually_exclusive_group()
    values.add_argument("--values", type=float, nargs="*", help="扫描值（参数自身单位）")
    values.add_argument(
        "--linspace", type=float, nargs=3, metavar=("START", "STOP", "NUM"), help="线性等距取值（参数自身单位）"
    )
    values.add_argument(
        "--logspace", type=float, nargs=3, metavar=("START", "STOP", "NUM"), help="对数等距取值（参数自身单位，端点 > 0）"
    )
    p.add_argument("--observable", choices=["area_ratio", "peak_value"], help="观测量 (default: area_ratio)")
    p.add_argument("--noise-model", choices=NOISE_MODELS, default="full_coth", help="热噪声模型 (default: full_coth)")
    p.set_defaults(handler=COMMANDS["sweep"])

    # simulate
    p = sub.add_parser(
        "simulate",
        parents=[params, output],
        help="线性化 Langevin 方程蒙特卡洛 → Welch 功率谱 (m²·s)",
    )
    p.add_argument(
        "--scheme",
        choices=["auto", "euler_maruyama", "stochastic_heun", "exact_propagator"],
        default="auto",
        help="积分格式 (default: auto)",
    )
    p.add_argument("--dt", type=float, help="积分步长 (s, default: 由格式决定)")
    p.add_argument("--duration", type=float, help="记录时长 (s，不含预热)")
    p.add_argument("--burn-in", type=float, help="预热时长 (s, default: 5/γ_m)")
    p.add_argument("--realizations", type=int, help="实现数 (default: 200)")
    p.add_argument("--seed", type=int, default=0, help="64 位主种子（非负整数, default: 0）")
    p.add_argument("--thin", type=int, default=1, help="全状态导出的抽取因子（整数 ≥ 1）")
    p.add_argument(
        "--noise-gains",
        type=float,
        nargs=4,
        metavar=("THERMAL", "CSL", "X_IN", "Y_IN"),
        help="各噪声通道增益（无量纲, default: 1 1 1 1）",
    )
    p.add_argument("--initial", choices=["stationary", "zero"], default="stationary", help="初态 (default: stationary)")
    p.add_argument("--segment-length", type=int, help="Welch 段长（采样点数）")
    p.add_argument("--trace-output", type=str, help="第 0 个实现的轨迹 CSV 路径")
    p.add_argument("--validate", action="store_true", help="与解析谱比较，超出容差时退出码 5")
    p.add_argument("--tol", type=float, default=None, help="中位相对偏差容差（无量纲, default: 0.10）")
    p.add_argument(
        "--band", type=float, nargs=2, metavar=("LO", "HI"), help="比较频带 |ω| (rad/s, default: ω_m/2 到 2ω_m)"
    )
    p.set_defaults(handler=COMMANDS["simulate"])

    # presets
    p = sub.add_parser("presets", parents=[output], help="列出可用预设及其出处")
    p.set_defaults(handler=COMMANDS["presets"])

    return parser.parse_args(argv)


# =============================================================================
# 环境与日志
# =============================================================================


def validate_environment(args: argparse.Namespace) -> bool:
    """验证运行环境"""
    if args.skip_env_check:
        return True

    checker = EnvironmentChecker()
    ok = checker.validate()
    for error in checker.errors:
        print(f"❌ {error}", file=sys.stderr)
    for warning in checker.warnings:
        print(f"⚠️  {warning}", file=sys.stderr)
    return ok


def setup_application_environment(args: argparse.Namespace) -> None:
    """设置应用程序环境"""
    settings = get_settings()
    level_name = args.log_level or settings.LOG_LEVEL
    log_dir = Path(args.log_dir) if args.log_dir else settings.LOG_DIR
    setup_logging(level=getattr(logging, level_name.upper()), debug_mode=args.debug, log_dir=log_dir)

    if args.threads is not None and args.threads < 1:
        raise ParameterValidationError("--threads", args.threads, "必须 ≥ 1")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数"""

    args = parse_arguments(argv)

    try:
        if not validate_environment(args):
            return 1

        setup_application_environment(args)

        logger = logging.getLogger(__name__)
        logger.info(f"🚀 csl-spectra {args.command}")
        logger.debug(f"📂 项目根目录: {PROJECT_ROOT}")
        logger.debug(f"💻 系统信息: {EnvironmentChecker().get_system_info()}")

        return int(args.handler(args))

    except CslSpectraError as e:
        logging.getLogger(__name__).error(f"{type(e).__name__}: {e}", exc_info=args.debug)
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code

    except KeyboardInterrupt:
        print("\n⚠️  用户中断，正在退出...", file=sys.stderr)
        return 130

    except Exception as e:
        error_msg = f"❌ 运行失败: {e}"
        print(error_msg, file=sys.stderr)
        if args.debug:
            import traceback

            traceback.print_exc()
        logging.getLogger(__name__).critical(error_msg, exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
