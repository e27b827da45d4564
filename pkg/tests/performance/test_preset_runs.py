"""
内置预设的完整规模运行（标记 slow，默认不执行：pytest -m slow）
"""

import logging
import time

import numpy as np
import pytest

from cli.output import read_metadata
from main import main
from models.system import derive
from spectrum.area import QuadratureConfig
from spectrum.sweep import SweepSpec, sweep


@pytest.fixture(autouse=True)
def restore_logging(clean_settings):
    root = logging.getLogger()
    handlers = list(root.handlers)
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)


@pytest.mark.slow
def test_fig2a_thermal_simulation(tmp_path):
    out = tmp_path / "fig2a_thermal.csv"
    start = time.perf_counter()
    code = main(
        [
            "--skip-env-check",
            "simulate",
            "--preset",
            "fig2a_15ng",
            "--no-csl",
            "--validate",
            "--realizations",
            "200",
            "-o",
            str(out),
        ]
    )
    elapsed = time.perf_counter() - start

    meta = read_metadata(out)
    # 自动格式选择：Heun 步数超限时退回精确传播子
    assert meta["results"]["scheme"] == "exact_propagator"
    assert meta["results"]["comparison"]["n_bins"] > 0
    assert code == meta["exit_status"] == 0
    assert meta["results"]["comparison"]["median_rel_dev"] <= 0.10
    assert elapsed < 600.0


@pytest.mark.slow
def test_fig2b_sweep(registry):
    config = registry.get("fig2b").config()
    params = derive(config.to_raw_inputs())
    spec = SweepSpec(config.sweep.param, config.sweep.values, config.sweep.observable)
    table = sweep(params, spec, QuadratureConfig.from_app_config())
    frame = table.to_frame()

    assert frame.height == 10
    assert all(row.ok for row in table.rows)
    I = frame["area_ratio"].to_numpy()
    Lambda = frame["Lambda_rad_per_s"].to_numpy()
    assert np.all(I > 1.0)
    # Δ = 4κ 时 I 对 Λ 近似线性
    r = np.corrcoef(Lambda, I)[0, 1]
    assert r**2 > 0.99
