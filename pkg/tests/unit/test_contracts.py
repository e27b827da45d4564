"""
公共层单元测试：数据契约、异常退出码、指纹、数值默认值与运行时设置
"""

import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from common.config import _DEFAULTS, get_app_config, get_section
from common.contracts import (
    AccuracyError,
    ConfigError,
    CslSpectraError,
    DivergenceError,
    EmptyBandError,
    GridSpecError,
    PaddingError,
    ParameterValidationError,
    QuadratureError,
    SimConfigError,
    Spectrum,
    SpectrumEvaluationError,
    SpectrumKind,
    StabilityError,
    ToleranceError,
    fingerprint_of,
)
from common.settings import AppSettings, get_settings


class TestExitCodes:
    """异常 → 退出码映射"""

    @pytest.mark.parametrize(
        "error, code",
        [
            (ParameterValidationError("mirror.mass", -1.0, "必须为正"), 2),
            (ConfigError("x.yaml", "未知键"), 2),
            (GridSpecError("空网格"), 2),
            (SimConfigError("dt", "过大"), 2),
            (EmptyBandError((1.0, 2.0)), 2),
            (AccuracyError(3e-8, 2.5e-8), 3),
            (PaddingError(0, "low"), 3),
            (QuadratureError(1e-3, 1e-6), 3),
            (StabilityError(0.5), 4),
            (SpectrumEvaluationError(1.0), 4),
            (DivergenceError(3, 1e13), 4),
            (ToleranceError(0.2, 0.1), 5),
            (CslSpectraError("其它"), 1),
        ],
    )
    def test_exit_code(self, error, code):
        assert error.exit_code == code
        assert isinstance(error, CslSpectraError)

    def test_error_fields(self):
        err = ParameterValidationError("cavity.kappa", 0.0, "必须为正")
        assert (err.field, err.value, err.reason) == ("cavity.kappa", 0.0, "必须为正")
        assert "cavity.kappa" in str(err)

        err = ToleranceError(0.25, 0.1)
        assert err.median == 0.25
        assert err.tolerance == 0.1


class TestFingerprint:
    def test_key_order_irrelevant(self):
        a = {"mirror": {"mass_kg": 1e-9, "temperature_k": 1e-3}, "cavity": {"power_w": 4e-3}}
        b = {"cavity": {"power_w": 4e-3}, "mirror": {"temperature_k": 1e-3, "mass_kg": 1e-9}}
        assert fingerprint_of(a) == fingerprint_of(b)

    def test_bitwise_float_sensitivity(self):
        x = 1e-3
        y = np.nextafter(x, 1.0)
        assert fingerprint_of({"v": x}) != fingerprint_of({"v": float(y)})

    def test_hex_digest(self):
        fp = fingerprint_of({"a": 1})
        assert len(fp) == 64
        int(fp, 16)


class TestSpectrum:
    def test_valid(self):
        s = Spectrum(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 2.0, 1.0]), SpectrumKind.DISPLACEMENT_FULL)
        assert len(s) == 3
        frame = s.to_frame()
        assert frame.columns == ["omega_rad_per_s", "value"]
        assert frame["value"].to_list() == [1.0, 2.0, 1.0]

    def test_non_increasing_grid(self):
        with pytest.raises(GridSpecError):
            Spectrum(np.array([0.0, 0.0, 1.0]), np.ones(3), SpectrumKind.MEASURED)

    def test_negative_values(self):
        with pytest.raises(GridSpecError):
            Spectrum(np.array([0.0, 1.0]), np.array([1.0, -1e-30]), SpectrumKind.MEASURED)

    def test_shape_mismatch(self):
        with pytest.raises(GridSpecError):
            Spectrum(np.array([0.0, 1.0]), np.ones(3), SpectrumKind.MEASURED)


class TestAppConfig:
    def test_defaults_present(self):
        cfg = get_app_config()
        for section in ("quadrature", "geometry", "simulation", "welch", "output"):
            assert section in cfg

    def test_values(self):
        assert get_section("quadrature")["target_rel_error"] == 1e-6
        assert get_section("geometry")["accuracy_ratio"] == 0.25
        assert get_section("simulation")["resolution_gate"] == 0.1
        assert get_section("simulation")["sampling_gate"] == 0.5

    def test_unknown_section(self):
        assert get_section("no_such_section") == {}

    def test_shipped_file_has_only_known_sections(self):
        path = Path(__file__).resolve().parents[2] / "config" / "app_config.json"
        shipped = json.loads(path.read_text(encoding="utf-8"))
        assert set(shipped) == set(_DEFAULTS)
        for section, values in shipped.items():
            assert set(values) <= set(_DEFAULTS[section])


class TestSettings:
    def test_defaults(self, clean_settings):
        settings = get_settings()
        assert settings.DEFAULT_PRESET == "fig2a_15ng"
        assert settings.THREADS is None
        assert settings.LOG_LEVEL == "INFO"

    def test_environment_override(self, clean_settings, tmp_path):
        clean_settings.setenv("CSLSPEC_DEFAULT_PRESET", "grw")
        clean_settings.setenv("CSLSPEC_THREADS", "3")
        clean_settings.setenv("CSLSPEC_LOG_LEVEL", "debug")
        clean_settings.setenv("CSLSPEC_PRESET_DIR", str(tmp_path))
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.DEFAULT_PRESET == "grw"
        assert settings.THREADS == 3
        assert settings.LOG_LEVEL == "DEBUG"
        assert settings.PRESET_DIR == tmp_path

    def test_invalid_threads(self, clean_settings):
        clean_settings.setenv("CSLSPEC_THREADS", "0")
        with pytest.raises(ValidationError):
            AppSettings()

    def test_invalid_log_level(self, clean_settings):
        clean_settings.setenv("CSLSPEC_LOG_LEVEL", "LOUD")
        with pytest.raises(ValidationError):
            AppSettings()
