"""
CSL噪声谱数值平台 - 环境检查与日志初始化

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》common 模块 环境检查、日志
用途：运行环境验证、依赖检查、日志系统初始化

环境检查清单：
- Python版本 ≥ 3.9
- 数值依赖库版本验证（numpy / scipy / polars / pydantic / PyYAML）
- 内置配置文件（app_config.json、预设目录）
- 系统资源与 BLAS 线程设置报告
"""

import importlib
import logging
import logging.handlers
import os
import platform
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from packaging import version

REQUIRED_PACKAGES: List[Tuple[str, str]] = [
    ("numpy", "1.24.0"),
    ("scipy", "1.10.0"),
    ("polars", "0.19.0"),
    ("pydantic", "2.0.0"),
    ("yaml", "6.0"),
]

# 线程池与多线程 BLAS 叠加时会超额订阅核心，调试日志中报告
BLAS_THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

PROJECT_ROOT = Path(__file__).resolve().parents[2]


class EnvironmentChecker:
    """环境检查器：errors 阻止运行，warnings 仅提示"""

    def __init__(self, project_root: Path = PROJECT_ROOT):
        self.project_root = Path(project_root)
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def check_python_version(self, min_version: str = "3.9.0") -> bool:
        try:
            return version.parse(platform.python_version()) >= version.parse(min_version)
        except version.InvalidVersion:
            return False

    def check_package_version(self, package_name: str, min_version: str) -> bool:
        """包可导入且版本不低于 min_version；无版本号视为满足"""
        try:
            module = importlib.import_module(package_name)
        except ImportError:
            return False
        installed = getattr(module, "__version__", None)
        if installed is None:
            return True
        try:
            return version.parse(installed) >= version.parse(min_version)
        except version.InvalidVersion:
            self.warnings.append(f"{package_name} 版本号无法解析: {installed}")
            return True

    def check_data_files(self) -> bool:
        """内置数值默认值与预设目录"""
        ok = True
        app_config = self.project_root / "config" / "app_config.json"
        if not app_config.is_file():
            self.warnings.append(f"未找到 {app_config}，使用内置数值默认值")
        presets = self.project_root / "config" / "presets"
        if not presets.is_dir() or not any(presets.glob("*.yaml")):
            self.errors.append(f"内置预设目录缺失或为空: {presets}")
            ok = False
        return ok

    def check_system_resources(self, min_memory_gb: float = 2.0) -> bool:
        try:
            import psutil
        except ImportError:
            self.warnings.append("psutil未安装，无法检查系统资源")
            return True

        memory_gb = psutil.virtual_memory().total / (1024**3)
        if memory_gb < min_memory_gb:
            self.warnings.append(f"内存不足: {memory_gb:.1f}GB < {min_memory_gb}GB")
            return False
        return True

    def get_system_info(self) -> Dict[str, object]:
        info: Dict[str, object] = {
            "platform": platform.platform(),
            "python_version": platform.python_version(),
            "architecture": platform.architecture()[0],
        }
        try:
            import psutil

            info["memory_total_gb"] = round(psutil.virtual_memory().total / (1024**3), 1)
            info["cpu_physical"] = psutil.cpu_count(logical=False)
            info["cpu_logical"] = psutil.cpu_count()
        except ImportError:
            pass
        for name in BLAS_THREAD_VARIABLES:
            if name in os.environ:
                info[name] = os.environ[name]
        return info

    def validate(self) -> bool:
        """完整检查，返回是否可运行"""
        if not self.check_python_version():
            self.errors.append("Python版本过低，需要3.9+")

        for package, min_ver in REQUIRED_PACKAGES:
            if not self.check_package_version(package, min_ver):
                self.errors.append(f"缺少或版本过低: {package} >= {min_ver}")

        self.check_data_files()
        self.check_system_resources()
        return not self.errors


def default_worker_count() -> int:
    """默认工作线程数：物理核心数"""
    try:
        import psutil

        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    except ImportError:
        return os.cpu_count() or 1


# =============================================================================
# 日志
# =============================================================================

PLAIN_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DEBUG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"


def _rotating(path: Path, max_mb: int, backups: int, level: int, formatter: logging.Formatter) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        path, maxBytes=max_mb * 1024 * 1024, backupCount=backups, encoding="utf-8"
    )
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logging(
    level: int = logging.INFO, debug_mode: bool = False, log_dir: Optional[Path] = None
) -> None:
    """设置日志系统

    控制台输出到 stderr（stdout 保留给命令结果）；给定 log_dir 时追加 app.log 与 error.log。
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if debug_mode else level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(DEBUG_FORMAT if debug_mode else PLAIN_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.DEBUG if debug_mode else level)
    console.setFormatter(formatter)
    root.addHandler(console)

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        root.addHandler(_rotating(log_dir / "app.log", 10, 5, logging.DEBUG if debug_mode else logging.INFO, formatter))
        root.addHandler(_rotating(log_dir / "error.log", 5, 3, logging.ERROR, formatter))

    logging.getLogger(__name__).debug(
        f"日志系统初始化完成, 目录: {log_dir}, 级别: {logging.getLevelName(root.level)}"
    )
