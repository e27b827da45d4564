"""
Numeric defaults loader and accessors.

Reads config/app_config.json once and exposes typed helpers for the numeric
knobs shared by the spectrum, geometry and langevin modules. Missing file or
missing keys fall back to the built-in defaults below.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

logger = logging.getLogger(__name__)

_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "quadrature": {
        "epsrel": 1e-10,
        "target_rel_error": 1e-6,
        "tail_rel_tolerance": 1e-8,
        "panel_limit": 500,
        "max_tail_extensions": 8,
        "decades_around_features": 5,
    },
    "geometry": {
        "kernel_truncation_radii": 6.0,
        "accuracy_ratio": 0.25,
        "default_padding_radii": 4.0,
        "supersampling": 8,
        "block_rows": 64,
    },
    "simulation": {
        "divergence_threshold": 1e12,
        "resolution_gate": 0.1,
        "sampling_gate": 0.5,
        "burn_in_damping_times": 5.0,
        "chunk_steps": 4096,
        "max_steps": 2000000,
        "heun_safety": 0.5,
        "samples_per_period": 16,
        "default_realizations": 200,
    },
    "welch": {
        "overlap": 0.5,
        "resolution_fraction": 0.0025,
        "segments": 8,
        "default_tolerance": 0.10,
    },
    "output": {
        "metadata_suffix": ".meta.json",
        "plot_suffix": ".gp",
    },
}


def _config_path() -> Path:
    """Resolve the app_config.json path relative to project root.

    Assumes this file is located under src/common/; project root is two levels up.
    """
    root = Path(__file__).resolve().parents[2]
    return root / "config" / "app_config.json"


@lru_cache(maxsize=1)
def get_app_config() -> Dict[str, Dict[str, Any]]:
    """Return the merged numeric configuration (cached)."""
    cfg = {section: dict(values) for section, values in _DEFAULTS.items()}
    try:
        with _config_path().open("r", encoding="utf-8") as f:
            loaded = json.load(f)
    except FileNotFoundError:
        return cfg
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"app_config.json 读取失败，使用内置默认值: {e}")
        return cfg

    for section, values in loaded.items():
        if isinstance(values, dict):
            cfg.setdefault(section, {}).update(values)
    return cfg


def get_section(name: str) -> Dict[str, Any]:
    """Return one configuration section; unknown names yield an empty dict."""
    return get_app_config().get(name, {})
