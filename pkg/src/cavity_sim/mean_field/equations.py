"""
Mean-field equations of motion in the frame rotating at ω_c.

State vector layout: [Re α, Im α, Re β, Im β, ζ, X, Y, Z] with α = ⟨a⟩,
β = 2⟨σ−⟩, ζ = ⟨σ3⟩, X = ⟨J+ + J−⟩, Y = i⟨J+ − J−⟩, Z = ⟨J3⟩.

    dα/dt = −κα − i(Ω/4)Xβ − iε
    dβ/dt = iΩXαζ
    dζ/dt = −i(Ω/2)X(αβ* − α*β)
    dX/dt = ω_r Y
    dY/dt = −ω_r X + (Ω/2)Z(αβ* + α*β)
    dZ/dt = −(Ω/2)Y(αβ* + α*β)

|β|² + ζ² and X² + Y² + Z² are conserved.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Union
import logging

import numpy as np
from tqdm import tqdm

from src.app.core.config import settings
from src.cavity_sim.errors import IntegrationError

logger = logging.getLogger("cavity_sim.mean_field")

STATE_SIZE = 8
AR, AI, BR, BI, ZETA, X, Y, Z = range(STATE_SIZE)
FD_STEP = 1e-6
STEP_SAFETY = 1e-2


@dataclass(frozen=True)
class MeanFieldParams:
    kappa: float
    omega: float
    omega_r: float
    epsilon: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("κ must be positive")
        if self.epsilon < 0:
            raise ValueError("ε must be non-negative")
        if self.omega_r < 0:
            raise ValueError("ω_r must be non-negative")

    @property
    def eps_crit(self) -> float:
        return 0.5 * self.omega

    @property
    def limiting_amplitude(self) -> float:
        """Drive separating single- and double-peaked steady states (Ω/4)."""
        return 0.25 * self.omega

    @property
    def max_step(self) -> float:
        return STEP_SAFETY / max(self.kappa, abs(self.omega), self.epsilon)

    def with_epsilon(self, epsilon: float) -> "MeanFieldParams":
        return MeanFieldParams(self.kappa, self.omega, self.omega_r, float(epsilon))


@dataclass
class MeanFieldState:
    alpha: complex
    beta: complex
    zeta: float
    X: float
    Y: float
    Z: float

    def to_vector(self) -> np.ndarray:
        return np.array([
            self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag,
            self.zeta, self.X, self.Y, self.Z,
        ], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "MeanFieldState":
        v = np.asarray(v, dtype=float)
        if v.shape != (STATE_SIZE,):
            raise ValueError(f"mean-field vector must have {STATE_SIZE} entries, got {v.shape}")
        return cls(complex(v[AR], v[AI]), complex(v[BR], v[BI]), float(v[ZETA]),
                   float(v[X]), float(v[Y]), float(v[Z]))

    @classmethod
    def random(cls, rng: np.random.Generator, alpha_scale: float = 1.0) -> "MeanFieldState":
        """Physical state: unit atomic and motional Bloch vectors, random α."""
        atom = rng.normal(size=3)
        atom /= np.linalg.norm(atom)
        motion = rng.normal(size=3)
        motion /= np.linalg.norm(motion)
        alpha = alpha_scale * complex(*rng.normal(size=2))
        return cls(alpha, complex(atom[0], atom[1]), float(atom[2]), *map(float, motion))


StateLike = Union[MeanFieldState, np.ndarray]


def _as_array(s: StateLike) -> np.ndarray:
    return s.to_vector() if isinstance(s, MeanFieldState) else np.asarray(s, dtype=float)


def conserved_quantities(s: StateLike) -> np.ndarray:
    """[|β|² + ζ², X² + Y² + Z²], batched over leading axes."""
    v = _as_array(s)
    atom = v[..., BR] ** 2 + v[..., BI] ** 2 + v[..., ZETA] ** 2
    motion = v[..., X] ** 2 + v[..., Y] ** 2 + v[..., Z] ** 2
    return np.stack([atom, motion], axis=-1)


def mf_rhs(s: StateLike, p: MeanFieldParams) -> np.ndarray:
    """Time derivative of the state vector (works on batches of shape (..., 8))."""
    v = _as_array(s)
    ar, ai, br, bi, zeta, x, y, z = (v[..., k] for k in range(STATE_SIZE))
    om = p.omega
    # Re(αβ*) and Im(αβ*)
    re_ab = ar * br + ai * bi
    im_ab = ai * br - ar * bi
    out = np.empty_like(v)
    out[..., AR] = -p.kappa * ar + 0.25 * om * x * bi
    out[..., AI] = -p.kappa * ai - 0.25 * om * x * br - p.epsilon
    out[..., BR] = -om * x * zeta * ai
    out[..., BI] = om * x * zeta * ar
    out[..., ZETA] = om * x * im_ab
    out[..., X] = p.omega_r * y
    out[..., Y] = -p.omega_r * x + om * z * re_ab
    out[..., Z] = -om * y * re_ab
    return out


def mf_jacobian(s: StateLike, p: MeanFieldParams) -> np.ndarray:
    """Analytic 8×8 Jacobian of mf_rhs."""
    ar, ai, br, bi, zeta, x, y, z = _as_array(s)
    om, k = p.omega, p.kappa
    re_ab = ar * br + ai * bi
    im_ab = ai * br - ar * bi
    J = np.zeros((STATE_SIZE, STATE_SIZE))

    J[AR, AR] = -k
    J[AR, BI] = 0.25 * om * x
    J[AR, X] = 0.25 * om * bi

    J[AI, AI] = -k
    J[AI, BR] = -0.25 * om * x
    J[AI, X] = -0.25 * om * br

    J[BR, AI] = -om * x * zeta
    J[BR, ZETA] = -om * x * ai
    J[BR, X] = -om * zeta * ai

    J[BI, AR] = om * x * zeta
    J[BI, ZETA] = om * x * ar
    J[BI, X] = om * zeta * ar

    J[ZETA, AR] = -om * x * bi
    J[ZETA, AI] = om * x * br
    J[ZETA, BR] = om * x * ai
    J[ZETA, BI] = -om * x * ar
    J[ZETA, X] = om * im_ab

    J[X, Y] = p.omega_r

    J[Y, AR] = om * z * br
    J[Y, AI] = om * z * bi
    J[Y, BR] = om * z * ar
    J[Y, BI] = om * z * ai
    J[Y, X] = -p.omega_r
    J[Y, Z] = om * re_ab

    J[Z, AR] = -om * y * br
    J[Z, AI] = -om * y * bi
    J[Z, BR] = -om * y * ar
    J[Z, BI] = -om * y * ai
    J[Z, Y] = -om * re_ab
    return J


def finite_difference_jacobian(s: StateLike, p: MeanFieldParams, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian, used to cross-check mf_jacobian."""
    v = _as_array(s)
    shifts = step * np.eye(STATE_SIZE)
    plus = mf_rhs(v[None, :] + shifts, p)
    minus = mf_rhs(v[None, :] - shifts, p)
    return ((plus - minus) / (2.0 * step)).T


@dataclass
class MeanFieldTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_records, ..., 8)
    drift: Dict[str, float]

    def final(self) -> MeanFieldState:
        return MeanFieldState.from_vector(self.states[-1].reshape(-1, STATE_SIZE)[0])


def mf_integrate(
    s0: StateLike,
    p: MeanFieldParams,
    t_end: float,
    dt: Optional[float] = None,
    record_every: int = 1,
) -> MeanFieldTrajectory:
    """
    Fixed-step classic RK4.

    Args:
        s0: initial state, or a batch of state vectors shaped (n, 8)
        p: parameters
        t_end: final time
        dt: step, at most 1e-2/max(κ, Ω, ε); defaults to that bound
        record_every: keep every k-th step

    Returns:
        MeanFieldTrajectory with the recorded states and conservation drift.
    """
    dt = p.max_step if dt is None else float(dt)
    if dt <= 0 or dt > p.max_step * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3e} exceeds the stable bound {p.max_step:.3e}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    if n_steps < 1:
        raise ValueError("t_end must be positive")
    dt = t_end / n_steps

    v = _as_array(s0).astype(float).copy()
    c0 = conserved_quantities(v)
    times = [0.0]
    records = [v.copy()]
    logger.debug("RK4: %d steps of dt=%.3e", n_steps, dt)
    for step in tqdm(range(1, n_steps + 1), desc="mean-field", disable=not settings.show_progress,
                     mininterval=1.0):
        k1 = mf_rhs(v, p)
        k2 = mf_rhs(v + 0.5 * dt * k1, p)
        k3 = mf_rhs(v + 0.5 * dt * k2, p)
        k4 = mf_rhs(v + dt * k3, p)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0 or step == n_steps:
            if not np.all(np.isfinite(v)):
                raise IntegrationError(f"mean-field state became non-finite at t={step * dt:.4g}")
            times.append(step * dt)
            records.append(v.copy())

    drift_values = np.abs(conserved_quantities(v) - c0)
    drift = {
        "atom": float(np.max(drift_values[..., 0])),
        "motion": float(np.max(drift_values[..., 1])),
    }
    logger.info("RK4 done at t=%.3g, conservation drift atom=%.2e motion=%.2e",
                t_end, drift["atom"], drift["motion"])
    return MeanFieldTrajectory(np.array(times), np.array(records), drift)
