"""
Single heterodyne trajectory: SSE integration, filtered current and
conditioned expectations sampled at a fixed stride.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.app.core.config import settings
from src.cavity_sim.errors import IntegrationError, ParityDriftError, TailError
from src.cavity_sim.hilbert import build_operator
from src.cavity_sim.open_system import OpenModelParams, build_open_system
from src.cavity_sim.trajectories.sse import SCHEMES, SSEKernel, heterodyne_noise

logger = logging.getLogger("cavity_sim.trajectories.runner")

PARITY_TOL = 1e-6
EIGENSTATE_TOL = 1e-12
NOISE_BLOCK = 4096


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Named bit generator seeded from stream ``stream`` of SeedSequence(seed)."""
    bit_generator = getattr(np.random, settings.rng_bit_generator)
    child = np.random.SeedSequence(seed).spawn(stream + 1)[stream]
    return np.random.Generator(bit_generator(child))


@dataclass(frozen=True, eq=False)
class TrajectoryConfig:
    model: OpenModelParams
    duration: float
    kappa_d: float
    seed: int
    stream: int = 0
    dt: Optional[float] = None  # settings.sse_dt / κ when omitted
    record_stride: int = 100
    scheme: str = "exponential"

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", settings.sse_dt / self.model.kappa)
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.kappa_d > 0:
            raise ValueError(f"κ_D must be > 0, got {self.kappa_d}")
        if not self.dt > 0 or self.dt * self.model.max_rate > 0.02 * (1 + 1e-12):
            raise ValueError(
                f"dt={self.dt:.3e} does not resolve max(Ω, ε, κ)={self.model.max_rate:.3g} (dt·rate ≤ 0.02)"
            )
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.stream < 0:
            raise ValueError("stream must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme '{self.scheme}', expected one of {SCHEMES}")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def with_stream(self, stream: int) -> "TrajectoryConfig":
        return TrajectoryConfig(
            model=self.model, duration=self.duration, kappa_d=self.kappa_d, seed=self.seed,
            stream=stream, dt=self.dt, record_stride=self.record_stride, scheme=self.scheme,
        )

    def describe(self) -> dict:
        return {
            **self.model.describe(), "duration": self.duration, "kappa_d": self.kappa_d,
            "seed": int(self.seed), "stream": self.stream, "dt": self.dt,
            "record_stride": self.record_stride, "scheme": self.scheme,
            "bit_generator": settings.rng_bit_generator,
        }


@dataclass
class HeterodyneRecord:
    times: np.ndarray
    current: np.ndarray
    sigma_minus: np.ndarray
    j1_sigma_minus: np.ndarray
    parity: np.ndarray
    field: np.ndarray
    photons: np.ndarray
    seed: int
    stream: int
    kappa_d: float
    parity_drift: float
    switch_times: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def observable(self, name: str) -> np.ndarray:
        series = {
            "current": self.current, "sigma_minus": self.sigma_minus,
            "j1_sigma_minus": self.j1_sigma_minus, "parity": self.parity,
            "field": self.field, "photons": self.photons,
        }
        if name not in series:
            raise ValueError(f"unknown observable '{name}', expected one of {sorted(series)}")
        return series[name]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "re_I": self.current.real, "im_I": self.current.imag,
            "re_sigma_minus": self.sigma_minus.real, "im_sigma_minus": self.sigma_minus.imag,
            "re_j1_sigma_minus": self.j1_sigma_minus.real, "im_j1_sigma_minus": self.j1_sigma_minus.imag,
            "parity": self.parity,
            "re_a": self.field.real, "im_a": self.field.imag,
            "n": self.photons,
        })


def _probes(space) -> Dict[str, object]:
    sigma_minus = build_operator("sigma_minus", space)
    return {
        "sigma_minus": sigma_minus.matrix,
        "j1_sigma_minus": (build_operator("J1", space) @ sigma_minus).matrix,
        "parity": build_operator("parity_restricted", space).matrix,
        "field": build_operator("annihilate", space).matrix,
        "photons": build_operator("number", space).matrix,
    }


def _tail(v: np.ndarray, n_max: int) -> float:
    prob = (np.abs(v) ** 2).reshape(n_max + 1, -1).sum(axis=1)
    return float(prob[-2:].sum())


def run_trajectory(cfg: TrajectoryConfig) -> HeterodyneRecord:
    """
    Integrate one heterodyne trajectory.

    The current obeys dI = −κ_D [I dt − dq/√κ]. Starts that are σ3J3
    eigenstates must keep ⟨σ3J3⟩ within 1e-6; mixed starts only report the
    drift.
    """
    model = cfg.model
    H, jump = build_open_system(model)
    kernel = SSEKernel(H, jump, cfg.dt, cfg.scheme)
    rng = make_generator(cfg.seed, cfg.stream)
    probes = _probes(model.space)

    v = model.initial_state.amplitudes.copy()
    v /= np.linalg.norm(v)
    parity0 = float(np.real(np.vdot(v, probes["parity"] @ v)))
    enforce_parity = abs(abs(parity0) - 1.0) < EIGENSTATE_TOL
    current = 0j
    sqrt_kappa = np.sqrt(model.kappa)

    samples: Dict[str, list] = {name: [] for name in probes}
    times, currents = [], []

    def _record(t: float) -> None:
        times.append(t)
        currents.append(current)
        for name, op in probes.items():
            samples[name].append(np.vdot(v, op @ v))

    _record(0.0)
    n_steps = cfg.n_steps
    logger.info("Trajectory seed=%d stream=%d: %d steps of dt=%.1e (%s)",
                cfg.seed, cfg.stream, n_steps, cfg.dt, cfg.scheme)
    noise = np.empty(0, dtype=complex)
    for step in tqdm(range(1, n_steps + 1), desc="trajectory", disable=not settings.show_progress,
                     mininterval=1.0):
        k = (step - 1) % NOISE_BLOCK
        if k == 0:
            noise = heterodyne_noise(rng, cfg.dt, size=NOISE_BLOCK)
        v, dq = kernel.step(v, noise[k])
        current += -cfg.kappa_d * (current * cfg.dt - dq / sqrt_kappa)
        if step % cfg.record_stride == 0 or step == n_steps:
            if not np.all(np.isfinite(v)):
                raise IntegrationError(f"trajectory state became non-finite at t={step * cfg.dt:.4g}")
            tail = _tail(v, model.n_max)
            if tail > settings.tail_tol:
                raise TailError(tail, settings.tail_tol, model.n_max)
            _record(step * cfg.dt)
            if enforce_parity:
                drift = abs(float(np.real(samples["parity"][-1])) - parity0)
                if drift > PARITY_TOL:
                    raise ParityDriftError(
                        f"⟨σ3J3⟩ drifted by {drift:.2e} at t={step * cfg.dt:.4g} (seed={cfg.seed})"
                    )

    parity = np.real(np.array(samples["parity"]))
    record = HeterodyneRecord(
        times=np.array(times),
        current=np.array(currents),
        sigma_minus=np.array(samples["sigma_minus"]),
        j1_sigma_minus=np.array(samples["j1_sigma_minus"]),
        parity=parity,
        field=np.array(samples["field"]),
        photons=np.real(np.array(samples["photons"])),
        seed=int(cfg.seed),
        stream=cfg.stream,
        kappa_d=cfg.kappa_d,
        parity_drift=float(np.max(np.abs(parity - parity0))),
    )
    if not enforce_parity:
        record.warnings.append(f"mixed-parity start; ⟨σ3J3⟩ drift {record.parity_drift:.2e} reported only")
    logger.debug("Trajectory done: parity drift %.2e", record.parity_drift)
    return record
