"""
CSL噪声谱数值平台 - 时域蒙特卡洛模拟器

文档版本：V1.0
创建日期：2026-10-18
依据文档：《DESIGN.md》langevin 模块

功能列表：
1. IntegratorScheme：Euler–Maruyama、随机 Heun、精确传播子
2. SimConfig：步长门限、预热时长、噪声增益、初态
3. 每个 (实现, 通道) 一条独立随机流，分块生成
4. 逐元素算术（不经 BLAS），结果与线程分组无关
5. 发散检测与 TraceEnsemble 输出

积分在零点标度坐标下进行，输出换算回物理单位。
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import polars as pl
from scipy import linalg

from common.config import get_section
from common.contracts import DivergenceError, SimConfigError, fingerprint_of
from common.environment import default_worker_count
from models.stability import require_stable, stability_check
from models.system import SystemParams

from .dynamics import (
    CHANNEL_TARGETS,
    covariance_factor,
    discretize_exact,
    drift_and_noise,
    scaled_stationary_covariance,
)

logger = logging.getLogger(__name__)

INITIAL_CHANNEL = 4  # 初态抽样与精确预热跳跃使用的通道


class IntegratorScheme(str, Enum):
    """积分格式"""

    EULER_MARUYAMA = "euler_maruyama"
    STOCHASTIC_HEUN = "stochastic_heun"
    EXACT_PROPAGATOR = "exact_propagator"


# =============================================================================
# 1. 模拟配置
# =============================================================================


@dataclass(frozen=True)
class SimConfig:
    """时域模拟配置"""

    dt: float  # s
    duration: float  # s，记录时长（不含预热）
    n_realizations: int  # 实现数
    seed: int  # 64 位主种子
    burn_in: float  # s，需 ≥ 5/γ_m
    scheme: IntegratorScheme = IntegratorScheme.STOCHASTIC_HEUN
    thin: int = 1  # 全状态导出的抽取因子
    noise_gains: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)  # 热、CSL、δx、δy
    initial: Union[str, Tuple[float, float, float, float]] = "stationary"  # stationary | zero | 物理状态
    max_workers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", IntegratorScheme(self.scheme))
        for name in ("dt", "duration"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise SimConfigError(name, f"必须为有限正数，实际 {value!r}")
        if not math.isfinite(self.burn_in) or self.burn_in < 0:
            raise SimConfigError("burn_in", f"必须为有限非负数，实际 {self.burn_in!r}")
        if int(self.n_realizations) < 1:
            raise SimConfigError("n_realizations", "至少 1 个实现")
        if int(self.thin) < 1:
            raise SimConfigError("thin", "必须 ≥ 1")
        if not 0 <= int(self.seed) < 2**64:
            raise SimConfigError("seed", "必须为 64 位非负整数")

        gains = tuple(float(g) for g in self.noise_gains)
        if len(gains) != 4 or any(not math.isfinite(g) or g < 0 for g in gains):
            raise SimConfigError("noise_gains", f"需要 4 个有限非负增益，实际 {self.noise_gains!r}")
        object.__setattr__(self, "noise_gains", gains)

        if isinstance(self.initial, str):
            if self.initial not in ("stationary", "zero"):
                raise SimConfigError("initial", f"未知初态 {self.initial!r}")
        else:
            state = tuple(float(v) for v in self.initial)
            if len(state) != 4 or not all(math.isfinite(v) for v in state):
                raise SimConfigError("initial", "显式初态需要 4 个有限分量 (δq, δp, δx, δy)")
            object.__setattr__(self, "initial", state)

        if self.n_steps < 1:
            raise SimConfigError("duration", "记录时长短于一个步长")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def burn_in_steps(self) -> int:
        return int(round(self.burn_in / self.dt))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt_s": self.dt,
            "duration_s": self.duration,
            "n_realizations": int(self.n_realizations),
            "seed": int(self.seed),
            "burn_in_s": self.burn_in,
            "scheme": self.scheme.value,
            "thin": int(self.thin),
            "noise_gains": list(self.noise_gains),
            "initial": self.initial if isinstance(self.initial, str) else list(self.initial),
        }

    @property
    def fingerprint(self) -> str:
        return fingerprint_of(self.to_dict())

    def validate_for(self, params: SystemParams) -> None:
        """与参数相关的门限检查"""
        sim = get_section("simulation")
        min_burn = sim.get("burn_in_damping_times", 5.0) / params.mirror.gamma_m
        if self.burn_in < min_burn * (1.0 - 1e-12):
            raise SimConfigError("burn_in", f"需要 ≥ {min_burn:.6g} s (5/γ_m)，实际 {self.burn_in:.6g} s")

        if self.scheme == IntegratorScheme.EXACT_PROPAGATOR:
            gate = sim.get("sampling_gate", 0.5)
            product = self.dt * params.mirror.omega_m
            if product >= gate:
                raise SimConfigError("dt", f"dt·ω_m = {product:.4g} 需 < {gate}")
            return

        gate = sim.get("resolution_gate", 0.1)
        product = self.dt * stability_check(params).spectral_radius
        if product >= gate:
            raise SimConfigError("dt", f"dt·max|本征值| = {product:.4g} 需 < {gate}")


# =============================================================================
# 2. 轨迹集合
# =============================================================================


@dataclass
class TraceEnsemble:
    """模拟轨迹集合"""

    dq: np.ndarray  # (R, N)，m，全速率
    states: np.ndarray  # (R, ⌈N/thin⌉, 4)，物理单位 (m, kg·m/s, 1, 1)
    dt: float  # s
    thin: int
    seed: int
    realization_indices: Tuple[int, ...]
    config_fingerprint: str
    params_fingerprint: str
    scheme: IntegratorScheme
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_realizations(self) -> int:
        return int(self.dq.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.dq.shape[1])

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def state_times(self) -> np.ndarray:
        return np.arange(self.states.shape[1]) * (self.dt * self.thin)

    def to_trace_frame(self, realization: int = 0) -> pl.DataFrame:
        s = self.states[realization]
        return pl.DataFrame(
            {
                "t_s": self.state_times(),
                "dq_m": s[:, 0],
                "dp_kgms": s[:, 1],
                "dx": s[:, 2],
                "dy": s[:, 3],
            }
        )

    def to_trace_csv(self, path: Union[str, Path], realization: int = 0) -> Path:
        """导出单个实现的抽取轨迹：t_s,dq_m,dp_kgms,dx,dy"""
        path = Path(path)
        self.to_trace_frame(realization).write_csv(path)
        logger.info(f"轨迹已写出: {path} (实现 {realization})")
        return path


# =============================================================================
# 3. 随机流
# =============================================================================


class _NoiseStreams:
    """每个 (实现, 通道) 一个 Generator，按固定块长生成"""

    def __init__(self, seed: int, realizations: Sequence[int], chunk: int):
        self.chunk = chunk
        self.generators = [
            [
                np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, c)))
                for c in range(len(CHANNEL_TARGETS))
            ]
            for r in realizations
        ]
        self.initial = [
            np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, INITIAL_CHANNEL)))
            for r in realizations
        ]

    def next_block(self) -> np.ndarray:
        """(通道, 实现, 块长) 标准正态"""
        return np.stack(
            [np.stack([gens[c].standard_normal(self.chunk) for gens in self.generators]) for c in range(4)]
        )

    def initial_normals(self) -> np.ndarray:
        """(4, 实现) 标准正态"""
        return np.stack([g.standard_normal(4) for g in self.initial], axis=1)


def _matvec(matrix: np.ndarray, state: List[np.ndarray]) -> List[np.ndarray]:
    """逐元素矩阵-向量乘，固定求和顺序"""
    out = []
    for i in range(4):
        acc = matrix[i, 0] * state[0]
        for j in range(1, 4):
            acc = acc + matrix[i, j] * state[j]
        out.append(acc)
    return out


# =============================================================================
# 4. 积分
# =============================================================================


@dataclass
class _Plan:
    """一次模拟的不可变准备量（标度坐标）"""

    A: np.ndarray
    B_diag: Tuple[float, float, float, float]  # 各通道幅度 × 增益
    sqrt_dt: float
    dt: float
    scheme: IntegratorScheme
    L_stationary: np.ndarray
    phi: Optional[np.ndarray] = None
    L_step: Optional[np.ndarray] = None
    phi_burn: Optional[np.ndarray] = None
    L_burn: Optional[np.ndarray] = None
    threshold: float = 1e12


def _add_noise(state: List[np.ndarray], plan: _Plan, noise: np.ndarray, k: int) -> List[np.ndarray]:
    out = list(state)
    for c, target in enumerate(CHANNEL_TARGETS):
        amp = plan.B_diag[c]
        if amp != 0.0:
            out[target] = out[target] + (amp * plan.sqrt_dt) * noise[c, :, k]
    return out


def _step(state: List[np.ndarray], plan: _Plan, noise: np.ndarray, k: int) -> List[np.ndarray]:
    if plan.scheme == IntegratorScheme.EXACT_PROPAGATOR:
        mean = _matvec(plan.phi, state)
        kick = _matvec(plan.L_step, [noise[c, :, k] for c in range(4)])
        return [mean[i] + kick[i] for i in range(4)]

    f = _matvec(plan.A, state)
    predictor = [state[i] + f[i] * plan.dt for i in range(4)]
    predictor = _add_noise(predictor, plan, noise, k)
    if plan.scheme == IntegratorScheme.EULER_MARUYAMA:
        return predictor

    f_pred = _matvec(plan.A, predictor)
    corrected = [state[i] + 0.5 * (f[i] + f_pred[i]) * plan.dt for i in range(4)]
    return _add_noise(corrected, plan, noise, k)


def _check_divergence(block: np.ndarray, realizations: Sequence[int], threshold: float, step: int) -> None:
    """block: (实现, ...) 标度坐标；报告该检查点上编号最小的发散实现"""
    flat = block.reshape(block.shape[0], -1)
    bad = ~np.all(np.isfinite(flat), axis=1) | np.any(np.abs(flat) > threshold, axis=1)
    if np.any(bad):
        i = int(np.argmax(bad))
        magnitude = float(np.nanmax(np.abs(flat[i]))) if np.any(np.isfinite(flat[i])) else None
        raise DivergenceError(int(realizations[i]), magnitude, step)


def _run_batch(
    plan: _Plan, config: SimConfig, realizations: Sequence[int], scale: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    chunk = int(get_section("simulation").get("chunk_steps", 4096))
    streams = _NoiseStreams(int(config.seed), realizations, chunk)
    n_r = len(realizations)

    # 初态（标度坐标）
    if config.initial == "stationary":
        state = _matvec(plan.L_stationary, list(streams.initial_normals()))
    elif config.initial == "zero":
        state = [np.zeros(n_r) for _ in range(4)]
    else:
        state = [np.full(n_r, config.initial[i] / scale[i]) for i in range(4)]

    # 预热；各批次的检查点序列相同
    done = 0
    if plan.scheme == IntegratorScheme.EXACT_PROPAGATOR:
        if config.burn_in > 0:
            # 初态抽样之后同一通道的下一组正态数
            mean = _matvec(plan.phi_burn, state)
            kick = _matvec(plan.L_burn, list(streams.initial_normals()))
            state = [mean[i] + kick[i] for i in range(4)]
            done = 1
            _check_divergence(np.stack(state, axis=1), realizations, plan.threshold, done)
    else:
        remaining = config.burn_in_steps
        while remaining > 0:
            noise = streams.next_block()
            steps = min(remaining, chunk)
            for k in range(steps):
                state = _step(state, plan, noise, k)
            remaining -= steps
            done += steps
            _check_divergence(np.stack(state, axis=1), realizations, plan.threshold, done)
        # 块内未用完的噪声丢弃，记录段从新块开始

    n = config.n_steps
    thin = int(config.thin)
    dq = np.empty((n_r, n))
    states = np.empty((n_r, (n + thin - 1) // thin, 4))

    k_global = 0
    while k_global < n:
        noise = streams.next_block()
        steps = min(chunk, n - k_global)
        start = k_global
        for k in range(steps):
            dq[:, k_global] = state[0]
            if k_global % thin == 0:
                states[:, k_global // thin, :] = np.stack(state, axis=1)
            state = _step(state, plan, noise, k)
            k_global += 1
        done += steps
        window = np.concatenate([dq[:, start:k_global], np.stack(state, axis=1)], axis=1)
        _check_divergence(window, realizations, plan.threshold, done)

    return dq * scale[0], states * scale


def _build_plan(params: SystemParams, config: SimConfig) -> _Plan:
    sde = drift_and_noise(params)
    gains = config.noise_gains
    B = sde.diffusion(gains)
    P = scaled_stationary_covariance(params, gains)
    plan = _Plan(
        A=sde.scaled_drift,
        B_diag=tuple(float(sde.scaled_amplitudes[c] * gains[c]) for c in range(4)),
        sqrt_dt=math.sqrt(config.dt),
        dt=config.dt,
        scheme=config.scheme,
        L_stationary=covariance_factor(P),
        threshold=float(get_section("simulation").get("divergence_threshold", 1e12)),
    )
    if config.scheme == IntegratorScheme.EXACT_PROPAGATOR:
        phi, Q = discretize_exact(sde.scaled_drift, B, config.dt)
        plan.phi = phi
        plan.L_step = covariance_factor(Q)
        plan.phi_burn = linalg.expm(sde.scaled_drift * config.burn_in)
        plan.L_burn = covariance_factor(P - plan.phi_burn @ P @ plan.phi_burn.T)
    return plan


def simulate(params: SystemParams, config: SimConfig, force: bool = False) -> TraceEnsemble:
    """积分线性 SDE 的多个独立实现

    给定 (seed, config) 结果逐位可复现，与 max_workers 无关。
    """
    require_stable(params, force)
    config.validate_for(params)

    start = time.perf_counter()
    plan = _build_plan(params, config)
    scale = drift_and_noise(params).scale

    n_r = int(config.n_realizations)
    workers = max(1, int(config.max_workers) if config.max_workers else default_worker_count())
    workers = min(workers, n_r)
    size = int(math.ceil(n_r / workers))
    batches = [list(range(s, min(s + size, n_r))) for s in range(0, n_r, size)]

    logger.info(
        f"开始模拟: {config.scheme.value}, {n_r} 个实现 × {config.n_steps} 步 "
        f"(预热 {config.burn_in:.4g}s), 线程 {workers}"
    )
    def run(batch: List[int]):
        try:
            return _run_batch(plan, config, batch, scale)
        except DivergenceError as error:
            return error

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(run, batches))

    failures = [r for r in results if isinstance(r, DivergenceError)]
    if failures:
        # 最早检查点上编号最小的实现，与批次划分无关
        raise min(failures, key=lambda e: (e.step, e.realization))

    dq = np.concatenate([r[0] for r in results], axis=0)
    states = np.concatenate([r[1] for r in results], axis=0)
    elapsed = time.perf_counter() - start
    logger.info(f"模拟完成，耗时 {elapsed:.2f}s")

    return TraceEnsemble(
        dq=dq,
        states=states,
        dt=config.dt,
        thin=int(config.thin),
        seed=int(config.seed),
        realization_indices=tuple(range(n_r)),
        config_fingerprint=config.fingerprint,
        params_fingerprint=params.fingerprint,
        scheme=config.scheme,
        metadata={
            "elapsed_s": elapsed,
            "omega_m_rad_per_s": params.mirror.omega_m,
            "gamma_m_rad_per_s": params.mirror.gamma_m,
        },
    )
