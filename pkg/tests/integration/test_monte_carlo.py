"""
蒙特卡洛与解析谱交叉校验（toy 参数，精确传播子）
"""

import numpy as np
import pytest

from common.contracts import NoiseModel
from langevin.psd import analytic_on_grid, compare_psd, ensemble_variance, welch_psd
from langevin.simulator import IntegratorScheme, SimConfig, simulate
from models.inputs import parse_config_dict
from models.system import derive, with_Lambda
from spectrum.area import QuadratureConfig, analytic_variance, area_ratio
from tests.conftest import TOY_LAMBDA, toy_config_dict


def config(**changes) -> SimConfig:
    base = dict(
        dt=0.004,
        duration=40.0,
        n_realizations=100,
        seed=2026,
        burn_in=1.0,
        scheme=IntegratorScheme.EXACT_PROPAGATOR,
    )
    base.update(changes)
    return SimConfig(**base)


@pytest.fixture(scope="module")
def toy_csl_ensemble():
    """100 个实现 × 40 s，模块内共用"""
    base = derive(parse_config_dict(toy_config_dict(), "toy").to_raw_inputs())
    params = with_Lambda(base, TOY_LAMBDA)
    return params, simulate(params, config())


class TestAgainstAnalytic:
    def test_psd_matches_markov_white(self, toy_csl_ensemble):
        params, ensemble = toy_csl_ensemble
        measured = welch_psd(ensemble, segment_length=2048)
        reference = analytic_on_grid(params, measured.omegas, NoiseModel.MARKOV_WHITE)
        report = compare_psd(measured, reference, (50.0, 200.0), 0.10)
        assert report.passed
        assert report.n_bins > 100

    def test_variance_matches_lyapunov(self, toy_csl_ensemble):
        params, ensemble = toy_csl_ensemble
        variance, stderr = ensemble_variance(ensemble)
        expected = analytic_variance(params, NoiseModel.MARKOV_WHITE)
        assert abs(variance - expected) < 5.0 * stderr

    def test_variance_ratio_matches_area_ratio(self, toy_csl_ensemble):
        params, with_csl = toy_csl_ensemble
        # 关闭 CSL 通道，其余通道使用相同随机流
        thermal = simulate(params, config(noise_gains=(1.0, 0.0, 1.0, 1.0)))
        ratio = ensemble_variance(with_csl)[0] / ensemble_variance(thermal)[0]
        expected = area_ratio(params, QuadratureConfig(), NoiseModel.MARKOV_WHITE).I
        assert expected > 1.2
        assert ratio == pytest.approx(expected, rel=0.05)

    def test_thermal_channel_alone(self, toy_params):
        ensemble = simulate(toy_params, config(n_realizations=40, noise_gains=(1.0, 0.0, 0.0, 0.0)))
        measured = welch_psd(ensemble, segment_length=2048)
        peak = measured.omegas[np.argmax(measured.values)]
        assert 85.0 < abs(peak) < 100.0
