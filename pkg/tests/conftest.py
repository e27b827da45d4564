"""
测试公共夹具

toy_*：小尺度参数（ω_m = 100 rad/s），供蒙特卡洛与谱交叉校验快速运行。
fig2a_*：内置预设参数。
"""

import sys
from pathlib import Path

import pytest
import yaml

PROJECT_ROOT = Path(__file__).resolve().parents[1]
for path in (PROJECT_ROOT / "src", PROJECT_ROOT):
    if str(path) not in sys.path:
        sys.path.insert(0, str(path))

from cli.presets import PresetRegistry  # noqa: E402
from common.settings import get_settings  # noqa: E402
from models.system import RawInputs, derive, with_changes, with_Lambda  # noqa: E402

TOY_LAMBDA = 1.3e4  # rad/s，与热噪声同量级


def toy_config_dict(**cavity_changes):
    """toy 参数的配置文件字典"""
    cavity = {
        "length_m": 0.025,
        "kappa_rad_per_s": 1000.0,
        "power_w": 1.1e-18,
        "detuning_rad_per_s": 2000.0,
    }
    cavity.update(cavity_changes)
    return {
        "name": "toy",
        "mirror": {
            "mass_kg": 1.0e-9,
            "omega_m_rad_per_s": 100.0,
            "gamma_m_rad_per_s": 5.0,
            "temperature_k": 1.0e-6,
        },
        "cavity": cavity,
        "collapse": {"gamma_csl_m3_per_s": 0.0},
    }


@pytest.fixture
def toy_inputs() -> RawInputs:
    return RawInputs(
        mass=1e-9,
        omega_m=100.0,
        gamma_m=5.0,
        temperature=1e-6,
        length=0.025,
        kappa=1000.0,
        power=1.1e-18,
        detuning=2000.0,
        gamma_csl=0.0,
    )


@pytest.fixture
def toy_params(toy_inputs):
    return derive(toy_inputs)


@pytest.fixture
def toy_csl_params(toy_params):
    return with_Lambda(toy_params, TOY_LAMBDA)


@pytest.fixture
def uncoupled_params(toy_params):
    """P = 0：无驱动，机械振子与腔解耦"""
    return with_changes(toy_params, power=0.0, detuning=0.0, kappa=150.0)


@pytest.fixture
def unstable_params(toy_params):
    """蓝失谐强驱动：静态光学弹簧超过机械刚度"""
    return with_changes(toy_params, power=1.1e-16)


@pytest.fixture(scope="session")
def registry() -> PresetRegistry:
    return PresetRegistry()


@pytest.fixture(scope="session")
def fig2a_params(registry):
    return derive(registry.get("fig2a_15ng").config().to_raw_inputs())


@pytest.fixture
def toy_config_file(tmp_path):
    path = tmp_path / "toy.yaml"
    path.write_text(yaml.safe_dump(toy_config_dict()), encoding="utf-8")
    return path


@pytest.fixture
def unstable_config_file(tmp_path):
    path = tmp_path / "unstable.yaml"
    path.write_text(yaml.safe_dump(toy_config_dict(power_w=1.1e-16)), encoding="utf-8")
    return path


@pytest.fixture
def clean_settings(monkeypatch):
    """清除 CSLSPEC_ 环境变量与设置缓存"""
    for key in ("PRESET_DIR", "DEFAULT_PRESET", "THREADS", "LOG_LEVEL", "LOG_DIR"):
        monkeypatch.delenv(f"CSLSPEC_{key}", raising=False)
    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
