"""
时域模拟单元测试：SDE 系数、精确离散化、SimConfig 门限、可复现性、方差、Welch 估计
"""

import logging
import math

import numpy as np
import pytest
from scipy import linalg

from common.contracts import (
    DivergenceError,
    EmptyBandError,
    SimConfigError,
    Spectrum,
    SpectrumKind,
)
from langevin.dynamics import (
    covariance_factor,
    discretize_exact,
    drift_and_noise,
    scaled_stationary_covariance,
    stationary_covariance,
)
from langevin.psd import (
    compare_psd,
    default_segment_length,
    ensemble_variance,
    estimate_psd,
    welch_psd,
)
from langevin.simulator import IntegratorScheme, SimConfig, TraceEnsemble, simulate
from models.stability import scaled_drift, scaling_vector, stability_check
from models.system import with_changes

EXACT = IntegratorScheme.EXACT_PROPAGATOR
HEUN = IntegratorScheme.STOCHASTIC_HEUN


def exact_config(**changes) -> SimConfig:
    base = dict(dt=0.004, duration=2.0, n_realizations=4, seed=7, burn_in=1.0, scheme=EXACT)
    base.update(changes)
    return SimConfig(**base)


class TestDriftAndNoise:
    def test_amplitudes(self, toy_csl_params):
        sde = drift_and_noise(toy_csl_params)
        p = toy_csl_params
        kT = p.constants.k_B * p.mirror.temperature
        assert sde.scaled_amplitudes[0] ** 2 == pytest.approx(2 * p.mirror.gamma_m * kT / (p.constants.hbar * p.mirror.omega_m))
        assert sde.scaled_amplitudes[1] ** 2 == pytest.approx(p.collapse.Lambda, rel=1e-12)
        assert sde.scaled_amplitudes[2] ** 2 == pytest.approx(2 * p.cavity.kappa)
        # 物理单位：热噪声力 2mγk_BT，CSL 力 ħ²λ
        assert sde.noise_amplitudes[0] ** 2 == pytest.approx(2 * p.mirror.mass * p.mirror.gamma_m * kT)
        assert sde.noise_amplitudes[1] ** 2 == pytest.approx(p.constants.hbar**2 * p.collapse.lambda_rate, rel=1e-12)

    def test_diffusion_layout(self, toy_csl_params):
        B = drift_and_noise(toy_csl_params).diffusion((1.0, 0.0, 2.0, 1.0))
        assert B[1, 1] == 0.0
        assert B[2, 2] == pytest.approx(2.0 * math.sqrt(2000.0))
        assert np.count_nonzero(B) == 3

    def test_stationary_covariance_solves_lyapunov(self, toy_csl_params):
        sde = drift_and_noise(toy_csl_params)
        P = scaled_stationary_covariance(toy_csl_params)
        B = sde.diffusion()
        residual = sde.scaled_drift @ P + P @ sde.scaled_drift.T + B @ B.T
        assert np.max(np.abs(residual)) < 1e-9 * np.max(np.abs(B @ B.T))

    def test_equipartition(self, uncoupled_params):
        p = uncoupled_params
        P = stationary_covariance(p)
        kT = p.constants.k_B * p.mirror.temperature
        assert P[0, 0] == pytest.approx(kT / (p.mirror.mass * p.mirror.omega_m**2), rel=1e-9)
        assert P[1, 1] == pytest.approx(p.mirror.mass * kT, rel=1e-9)


class TestDiscretization:
    def test_exact_step_preserves_stationary_covariance(self, toy_csl_params):
        sde = drift_and_noise(toy_csl_params)
        P = scaled_stationary_covariance(toy_csl_params)
        phi, Q = discretize_exact(sde.scaled_drift, sde.diffusion(), 0.004)
        np.testing.assert_allclose(phi @ P @ phi.T + Q, P, rtol=1e-7, atol=1e-9 * np.max(np.abs(P)))

    def test_covariance_factor(self):
        cov = np.array([[4.0, 2.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 0.0]])
        L = covariance_factor(cov)
        np.testing.assert_allclose(L @ L.T, cov, atol=1e-12)


class TestSimConfig:
    def test_valid(self, toy_params):
        config = exact_config()
        config.validate_for(toy_params)
        assert config.n_steps == 500
        assert config.burn_in_steps == 250

    def test_exact_sampling_gate(self, toy_params):
        with pytest.raises(SimConfigError):
            exact_config(dt=0.005).validate_for(toy_params)

    def test_heun_resolution_gate(self, toy_params):
        radius = stability_check(toy_params).spectral_radius
        SimConfig(0.09 / radius, 0.1, 1, 0, 1.0, HEUN).validate_for(toy_params)
        with pytest.raises(SimConfigError):
            SimConfig(0.11 / radius, 0.1, 1, 0, 1.0, HEUN).validate_for(toy_params)

    def test_burn_in_gate(self, toy_params):
        with pytest.raises(SimConfigError) as info:
            exact_config(burn_in=0.5).validate_for(toy_params)
        assert info.value.field == "burn_in"

    @pytest.mark.parametrize(
        "changes",
        [
            {"dt": 0.0},
            {"duration": -1.0},
            {"duration": 0.001},
            {"n_realizations": 0},
            {"thin": 0},
            {"seed": -1},
            {"noise_gains": (1.0, 1.0, -1.0, 1.0)},
            {"noise_gains": (1.0, 1.0)},
            {"initial": "thermal"},
            {"initial": (0.0, 0.0)},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(SimConfigError):
            exact_config(**changes)

    def test_fingerprint_tracks_config(self):
        assert exact_config().fingerprint == exact_config().fingerprint
        assert exact_config(seed=8).fingerprint != exact_config().fingerprint


class TestReproducibility:
    @pytest.mark.parametrize("scheme", [EXACT, HEUN, IntegratorScheme.EULER_MARUYAMA])
    def test_independent_of_workers(self, toy_params, uncoupled_params, scheme):
        # 显式格式用无驱动参数（谱半径 150 rad/s），步长可取 5e-4 s
        params, dt = (toy_params, 0.004) if scheme == EXACT else (uncoupled_params, 5e-4)
        kwargs = dict(dt=dt, duration=200 * dt, n_realizations=5, seed=11, burn_in=1.0, scheme=scheme)
        one = simulate(params, SimConfig(max_workers=1, **kwargs))
        three = simulate(params, SimConfig(max_workers=3, **kwargs))
        np.testing.assert_array_equal(one.dq, three.dq)
        np.testing.assert_array_equal(one.states, three.states)

    def test_realization_prefix(self, toy_params):
        small = simulate(toy_params, exact_config(n_realizations=3))
        large = simulate(toy_params, exact_config(n_realizations=6))
        np.testing.assert_array_equal(small.dq, large.dq[:3])

    def test_seed_changes_output(self, toy_params):
        a = simulate(toy_params, exact_config(seed=1))
        b = simulate(toy_params, exact_config(seed=2))
        assert not np.array_equal(a.dq, b.dq)

    def test_zero_gains_zero_trace(self, toy_params):
        ensemble = simulate(toy_params, exact_config(noise_gains=(0.0, 0.0, 0.0, 0.0)))
        assert np.all(ensemble.dq == 0.0)

    def test_free_decay_rate(self, uncoupled_params):
        x0 = (1e-9, 0.0, 0.0, 0.0)
        config = exact_config(dt=0.001, duration=2.0, n_realizations=1, noise_gains=(0.0, 0.0, 0.0, 0.0), initial=x0)
        ensemble = simulate(uncoupled_params, config)
        assert ensemble.dq[0, 0] == ensemble.states[0, 0, 0]
        s = scaling_vector(uncoupled_params)
        scaled = ensemble.states[0, :, :2] / s[:2]
        energy = np.sum(scaled**2, axis=1)
        slope = np.polyfit(ensemble.state_times(), np.log(energy), 1)[0]
        # 振幅衰减率 γ_m/2
        assert -0.5 * slope == pytest.approx(0.5 * uncoupled_params.mirror.gamma_m, rel=0.01)

    def test_csl_noise_linear_in_gain(self, toy_csl_params):
        variances = [
            ensemble_variance(simulate(toy_csl_params, exact_config(noise_gains=(0.0, g, 0.0, 0.0))))[0]
            for g in (1.0, 2.0)
        ]
        assert variances[0] > 0.0
        assert variances[1] == pytest.approx(4.0 * variances[0], rel=1e-9)

    @pytest.mark.parametrize("scheme, order", [(IntegratorScheme.EULER_MARUYAMA, 1), (HEUN, 2)])
    def test_weak_order(self, uncoupled_params, scheme, order):
        # 线性 SDE 的均值服从确定性格式，零噪声下无蒙特卡洛误差
        params = with_changes(uncoupled_params, gamma_m=50.0)
        x0 = np.array([1e-9, 0.0, 0.0, 0.0])
        s = scaling_vector(params)
        A = scaled_drift(params)
        errors = []
        for dt in (1e-4, 5e-5):
            config = SimConfig(
                dt=dt,
                duration=0.02,
                n_realizations=1,
                seed=0,
                burn_in=0.1,
                scheme=scheme,
                noise_gains=(0.0, 0.0, 0.0, 0.0),
                initial=tuple(x0),
            )
            ensemble = simulate(params, config)
            t = (config.burn_in_steps + config.n_steps - 1) * dt
            expected = linalg.expm(A * t) @ (x0 / s)
            errors.append(np.linalg.norm(ensemble.states[0, -1] / s - expected))
        assert errors[0] / errors[1] == pytest.approx(2.0**order, rel=0.3)

    def test_divergence(self, unstable_params):
        with pytest.raises(DivergenceError):
            simulate(unstable_params, exact_config(), force=True)

    def test_divergence_report_independent_of_workers(self, unstable_params):
        reports = []
        for workers in (1, 3):
            with pytest.raises(DivergenceError) as info:
                simulate(unstable_params, exact_config(n_realizations=6, max_workers=workers), force=True)
            reports.append((info.value.realization, info.value.step))
        assert reports[0] == reports[1]

    def test_trace_export(self, toy_params, tmp_path):
        ensemble = simulate(toy_params, exact_config(thin=4, duration=0.4))
        frame = ensemble.to_trace_frame(0)
        assert frame.columns == ["t_s", "dq_m", "dp_kgms", "dx", "dy"]
        assert frame.height == 25
        np.testing.assert_array_equal(frame["dq_m"].to_numpy(), ensemble.dq[0, ::4])
        path = ensemble.to_trace_csv(tmp_path / "trace.csv")
        assert path.exists()


class TestStationaryVariance:
    def test_exact_propagator(self, toy_params):
        config = SimConfig(dt=0.004, duration=20.0, n_realizations=40, seed=3, burn_in=1.0, scheme=EXACT)
        variance, stderr = ensemble_variance(simulate(toy_params, config))
        expected = stationary_covariance(toy_params)[0, 0]
        assert abs(variance - expected) < 5.0 * stderr

    def test_heun_equipartition(self, uncoupled_params):
        config = SimConfig(dt=5e-4, duration=4.0, n_realizations=100, seed=5, burn_in=1.0, scheme=HEUN)
        variance, stderr = ensemble_variance(simulate(uncoupled_params, config))
        expected = stationary_covariance(uncoupled_params)[0, 0]
        # Heun 的 O(dt²) 偏差约 0.3%
        assert abs(variance - expected) < 5.0 * stderr + 0.01 * expected


class TestWelch:
    def test_white_noise_level(self):
        rng = np.random.default_rng(0)
        dt, sigma = 0.01, 2.0
        samples = sigma * rng.standard_normal((8, 2**14))
        omegas, values = estimate_psd(samples, dt, 256)
        assert np.all(np.diff(omegas) > 0)
        assert np.mean(values) == pytest.approx(sigma**2 * dt, rel=0.01)
        # ∫P dω/2π = 方差
        area = np.sum(values) * (omegas[1] - omegas[0]) / (2 * math.pi)
        assert area == pytest.approx(sigma**2, rel=0.01)

    def test_sinusoid_power(self):
        dt, amplitude = 1e-3, 3.0
        t = np.arange(2**14) * dt
        samples = amplitude * np.sin(2 * math.pi * 12.3 * t + 0.4)
        omegas, values = estimate_psd(samples, dt, 1024)
        area = np.sum(values) * (omegas[1] - omegas[0]) / (2 * math.pi)
        assert area == pytest.approx(amplitude**2 / 2, rel=0.01)

    def test_segment_too_long(self):
        with pytest.raises(SimConfigError):
            estimate_psd(np.zeros(100), 0.01, 128)

    def test_default_segment_length(self):
        length = default_segment_length(10000, 0.004, 100.0)
        assert length & (length - 1) == 0
        assert length <= 10000
        assert default_segment_length(100, 0.004, 100.0) <= 100

    def test_welch_metadata(self, toy_params):
        ensemble = simulate(toy_params, exact_config(duration=4.0))
        spectrum = welch_psd(ensemble, segment_length=256)
        assert spectrum.kind == SpectrumKind.MEASURED
        assert spectrum.metadata["segments_per_realization"] == 1 + (1000 - 256) // 128
        assert spectrum.params_fingerprint == toy_params.fingerprint

    def test_peak_resolution_flag(self, toy_params, caplog):
        ensemble = simulate(toy_params, exact_config(duration=8.0))
        # 段长 256 → Δω ≈ 6.1 rad/s > γ_m = 5 rad/s
        with caplog.at_level(logging.WARNING, logger="langevin.psd"):
            coarse = welch_psd(ensemble, segment_length=256)
        assert coarse.metadata["resolves_peak"] is False
        assert "共振峰未被分辨" in caplog.text
        fine = welch_psd(ensemble, segment_length=1024)
        assert fine.metadata["resolution_rad_per_s"] < toy_params.mirror.gamma_m
        assert fine.metadata["resolves_peak"] is True

    def test_ensemble_variance_single_realization(self):
        ensemble = TraceEnsemble(
            dq=np.ones((1, 10)),
            states=np.zeros((1, 10, 4)),
            dt=0.1,
            thin=1,
            seed=0,
            realization_indices=(0,),
            config_fingerprint="",
            params_fingerprint="",
            scheme=EXACT,
        )
        variance, stderr = ensemble_variance(ensemble)
        assert variance == 1.0
        assert math.isinf(stderr)


class TestComparePsd:
    def _spectrum(self, values):
        omegas = np.linspace(-10.0, 10.0, 21)
        return Spectrum(omegas, np.asarray(values, dtype=float), SpectrumKind.MEASURED)

    def test_identical(self):
        s = self._spectrum(np.ones(21))
        report = compare_psd(s, s, (2.0, 8.0))
        assert report.passed
        assert report.median_rel_dev == 0.0
        assert report.n_bins == 14

    def test_offset_detected(self):
        measured = self._spectrum(1.2 * np.ones(21))
        analytic = self._spectrum(np.ones(21))
        report = compare_psd(measured, analytic, (0.0, 10.0), tolerance=0.1)
        assert not report.passed
        assert report.median_rel_dev == pytest.approx(0.2)

    def test_interpolated_reference(self):
        measured = self._spectrum(np.ones(21))
        analytic = Spectrum(np.array([-20.0, 20.0]), np.array([1.0, 1.0]), SpectrumKind.DISPLACEMENT_MARKOV_WHITE)
        assert compare_psd(measured, analytic, (1.0, 5.0)).median_rel_dev == 0.0

    def test_empty_band(self):
        s = self._spectrum(np.ones(21))
        with pytest.raises(EmptyBandError):
            compare_psd(s, s, (10.5, 20.0))
        with pytest.raises(EmptyBandError):
            compare_psd(s, s, (5.0, 2.0))
