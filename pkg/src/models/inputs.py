"""
CSL噪声谱数值平台 - 配置文件语法

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》model 模块、docs/config_grammar.md

功能列表：
1. YAML 配置/预设文件解析（未知键为硬错误）
2. 带单位后缀的键，Hz 键在此处乘 2π 转为 rad/s
3. --set 覆盖项（同一物理量的其它单位变体自动移除）
4. 转换为 RawInputs
"""

import copy
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from common.contracts import ConfigError

from .constants import DEFAULT_BODY_EDGE, DEFAULT_WAVELENGTH, NAMED_GAMMAS, R_C_DEFAULT
from .system import CollapseBody, RawInputs

# 同一物理量的单位变体，恰好出现一个
UNIT_VARIANTS: Dict[str, Dict[str, List[str]]] = {
    "mirror": {
        "omega_m": ["omega_m_rad_per_s", "omega_m_hz"],
        "gamma_m": ["gamma_m_rad_per_s", "gamma_m_hz", "quality_factor"],
    },
    "cavity": {
        "kappa": ["kappa_rad_per_s", "kappa_hz"],
        "detuning": ["detuning_rad_per_s", "detuning_hz", "detuning_over_kappa"],
    },
    "collapse": {
        "gamma_csl": ["gamma_csl_m3_per_s", "gamma_csl"],
    },
}


def _exactly_one(section: BaseModel, section_name: str) -> None:
    for quantity, keys in UNIT_VARIANTS[section_name].items():
        present = [k for k in keys if getattr(section, k) is not None]
        if len(present) != 1:
            raise ValueError(f"{quantity} 需要恰好一个键 {keys}，实际 {present or '无'}")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MirrorSection(_Section):
    mass_kg: float
    omega_m_rad_per_s: Optional[float] = None
    omega_m_hz: Optional[float] = None
    gamma_m_rad_per_s: Optional[float] = None
    gamma_m_hz: Optional[float] = None
    quality_factor: Optional[float] = None
    temperature_k: float

    @model_validator(mode="after")
    def _check_units(self):
        _exactly_one(self, "mirror")
        return self

    @property
    def omega_m(self) -> float:
        if self.omega_m_hz is not None:
            return 2.0 * math.pi * self.omega_m_hz
        return self.omega_m_rad_per_s

    @property
    def gamma_m(self) -> float:
        if self.gamma_m_hz is not None:
            return 2.0 * math.pi * self.gamma_m_hz
        if self.quality_factor is not None:
            return self.omega_m / self.quality_factor
        return self.gamma_m_rad_per_s


class CavitySection(_Section):
    length_m: float
    kappa_rad_per_s: Optional[float] = None
    kappa_hz: Optional[float] = None
    wavelength_m: float = DEFAULT_WAVELENGTH
    power_w: float
    detuning_rad_per_s: Optional[float] = None
    detuning_hz: Optional[float] = None
    detuning_over_kappa: Optional[float] = None

    @model_validator(mode="after")
    def _check_units(self):
        _exactly_one(self, "cavity")
        return self

    @property
    def kappa(self) -> float:
        if self.kappa_hz is not None:
            return 2.0 * math.pi * self.kappa_hz
        return self.kappa_rad_per_s

    @property
    def detuning(self) -> float:
        if self.detuning_hz is not None:
            return 2.0 * math.pi * self.detuning_hz
        if self.detuning_over_kappa is not None:
            return self.detuning_over_kappa * self.kappa
        return self.detuning_rad_per_s


class BodySection(_Section):
    shape: Literal["sphere", "cuboid"] = "cuboid"
    radius_m: Optional[float] = None
    a_m: Optional[float] = None
    b_m: Optional[float] = None
    c_m: Optional[float] = None

    @model_validator(mode="after")
    def _check_shape(self):
        if self.shape == "sphere":
            if self.radius_m is None or any(v is not None for v in (self.a_m, self.b_m, self.c_m)):
                raise ValueError("sphere 只接受 radius_m")
        else:
            if self.radius_m is not None:
                raise ValueError("cuboid 不接受 radius_m")
        return self

    def to_body(self) -> CollapseBody:
        if self.shape == "sphere":
            return CollapseBody.sphere(self.radius_m)
        dims = tuple(
            DEFAULT_BODY_EDGE if v is None else v for v in (self.a_m, self.b_m, self.c_m)
        )
        return CollapseBody.cuboid(*dims)


class CollapseSection(_Section):
    gamma_csl_m3_per_s: Optional[float] = None
    gamma_csl: Optional[Literal["grw", "adler"]] = None
    r_c_m: float = R_C_DEFAULT
    body: BodySection = BodySection()

    @model_validator(mode="after")
    def _check_units(self):
        _exactly_one(self, "collapse")
        return self

    @property
    def gamma(self) -> float:
        if self.gamma_csl is not None:
            return NAMED_GAMMAS[self.gamma_csl]
        return self.gamma_csl_m3_per_s


class GridSection(_Section):
    kind: Literal["linear", "log_symmetric"] = "linear"
    omega_min_rad_per_s: float
    omega_max_rad_per_s: float
    points: int
    include_zero: bool = True


class SweepSection(_Section):
    param: str
    values: List[float] = []
    observable: Literal["area_ratio", "peak_value"] = "area_ratio"


class ConfigFile(_Section):
    """配置文件 / 预设文件顶层结构"""

    name: Optional[str] = None
    provenance: Optional[str] = None
    mirror: MirrorSection
    cavity: CavitySection
    collapse: CollapseSection
    grid: Optional[GridSection] = None
    sweep: Optional[SweepSection] = None

    def to_raw_inputs(self) -> RawInputs:
        return RawInputs(
            mass=self.mirror.mass_kg,
            omega_m=self.mirror.omega_m,
            gamma_m=self.mirror.gamma_m,
            temperature=self.mirror.temperature_k,
            length=self.cavity.length_m,
            kappa=self.cavity.kappa,
            power=self.cavity.power_w,
            detuning=self.cavity.detuning,
            gamma_csl=self.collapse.gamma,
            r_c=self.collapse.r_c_m,
            wavelength=self.cavity.wavelength_m,
            body=self.collapse.body.to_body(),
        )


# =============================================================================
# 解析与覆盖
# =============================================================================


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item.get("loc", ()))
        parts.append(f"{loc or '<root>'}: {item.get('msg')}")
    return "; ".join(parts)


def parse_config_dict(data: Dict[str, Any], source: str = "<dict>") -> ConfigFile:
    """校验配置字典"""
    if not isinstance(data, dict):
        raise ConfigError(source, "顶层必须是映射")
    try:
        return ConfigFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(source, _format_validation_error(e)) from e


def read_config_dict(path: Path) -> Dict[str, Any]:
    """读取 YAML 配置文件为字典（未校验）"""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(str(path), "文件不存在") from e
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"YAML 解析失败: {e}") from e
    if data is None:
        raise ConfigError(str(path), "文件为空")
    return data


def load_config_file(path: Path) -> ConfigFile:
    """读取并校验配置文件"""
    return parse_config_dict(read_config_dict(path), str(path))


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """应用 key.path=value 覆盖项，返回新字典"""
    result = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError("--set", f"覆盖项必须为 key.path=value: {item!r}")
        key_path, raw_value = item.split("=", 1)
        keys = [k.strip() for k in key_path.strip().split(".") if k.strip()]
        if not keys:
            raise ConfigError("--set", f"空键: {item!r}")
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError as e:
            raise ConfigError("--set", f"值无法解析: {raw_value!r}") from e

        node = result
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError("--set", f"{key_path} 不是映射路径")
            node = child

        leaf = keys[-1]
        section = keys[0] if len(keys) == 2 else None
        for variants in UNIT_VARIANTS.get(section, {}).values():
            if leaf in variants:
                for other in variants:
                    if other != leaf:
                        node.pop(other, None)
        node[leaf] = value
    return result
