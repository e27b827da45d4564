"""
CSL噪声谱数值平台 - 参数预设注册表

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》cli 模块

功能列表：
1. Preset：命名的配置文件（YAML）及其出处说明
2. PresetRegistry：内置预设（只读）+ 用户预设目录
3. 用户预设不得覆盖内置名称
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from common.contracts import ConfigError
from common.settings import SHIPPED_PRESET_DIR, get_settings
from models.inputs import ConfigFile, parse_config_dict, read_config_dict

logger = logging.getLogger(__name__)

PRESET_SUFFIXES = (".yaml", ".yml")


@dataclass(frozen=True)
class Preset:
    """命名参数预设"""

    name: str
    path: Path
    shipped: bool  # 内置预设只读
    provenance: str = ""  # 数值来源说明
    _data: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def raw(self) -> Dict[str, Any]:
        """预设内容的深拷贝，调用方修改不影响注册表"""
        return copy.deepcopy(self._data)

    def config(self) -> ConfigFile:
        return parse_config_dict(self.raw(), f"preset:{self.name}")


def _load_preset(path: Path, shipped: bool) -> Preset:
    data = read_config_dict(path)
    config = parse_config_dict(data, str(path))
    name = config.name or path.stem
    if name != path.stem:
        raise ConfigError(str(path), f"预设名 {name!r} 与文件名 {path.stem!r} 不一致")
    return Preset(name, path, shipped, (config.provenance or "").strip(), data)


def _preset_files(directory: Path) -> List[Path]:
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix in PRESET_SUFFIXES)


class PresetRegistry:
    """预设注册表：内置目录先加载，用户目录后加载"""

    def __init__(self, shipped_dir: Path = SHIPPED_PRESET_DIR, user_dir: Optional[Path] = None):
        self.logger = logging.getLogger(self.__class__.__name__)
        self._presets: Dict[str, Preset] = {}
        self.shipped_dir = Path(shipped_dir)
        self.user_dir = Path(user_dir) if user_dir is not None else None

        if self.shipped_dir.is_dir():
            for path in _preset_files(self.shipped_dir):
                self.register(_load_preset(path, shipped=True))
        else:
            self.logger.warning(f"内置预设目录不存在: {self.shipped_dir}")

        if self.user_dir is not None and self.user_dir.is_dir():
            for path in _preset_files(self.user_dir):
                self.register(_load_preset(path, shipped=False))

        self.logger.debug(f"预设加载完成，共 {len(self._presets)} 个")

    @classmethod
    def from_settings(cls) -> "PresetRegistry":
        return cls(SHIPPED_PRESET_DIR, get_settings().PRESET_DIR)

    def register(self, preset: Preset) -> None:
        existing = self._presets.get(preset.name)
        if existing is not None:
            if existing.shipped:
                raise ConfigError(str(preset.path), f"不能覆盖内置预设 {preset.name!r}")
            raise ConfigError(str(preset.path), f"预设 {preset.name!r} 重复定义 ({existing.path})")
        self._presets[preset.name] = preset

    def get(self, name: str) -> Preset:
        try:
            return self._presets[name]
        except KeyError:
            raise ConfigError(
                f"preset:{name}", f"未知预设，可选: {', '.join(self.names())}"
            ) from None

    def names(self) -> List[str]:
        return sorted(self._presets)

    def all(self) -> List[Preset]:
        return [self._presets[n] for n in self.names()]

    def __contains__(self, name: str) -> bool:
        return name in self._presets

    def __len__(self) -> int:
        return len(self._presets)
