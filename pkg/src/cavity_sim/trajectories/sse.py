"""
Linear heterodyne stochastic Schrödinger equation

    d|ψ⟩ = [−i(H − iκ a†a) dt + J dq] |ψ⟩,   dq = ⟨J†⟩ dt + dZ,   J = √(2κ) a

with a complex Wiener increment dZ (⟨dZ* dZ⟩ = dt, ⟨dZ dZ⟩ = 0), one
Euler–Maruyama step at a time followed by renormalization. The "exponential"
scheme replaces the drift factor 1 − iH_eff dt by exp(−iH_eff dt).
"""
from typing import Optional, Tuple
import logging

import numpy as np
import scipy.linalg as la

from src.cavity_sim.errors import NormCollapseError, SpaceError
from src.cavity_sim.hilbert import Operator, StateVector

logger = logging.getLogger("cavity_sim.trajectories.sse")

COLLAPSE_TOL = 1e-12
SCHEMES = ("euler", "exponential")


def heterodyne_noise(rng: np.random.Generator, dt: float, size: Optional[int] = None) -> np.ndarray:
    """Complex increments with independent real/imaginary parts of variance dt/2."""
    scale = np.sqrt(0.5 * dt)
    real = rng.normal(0.0, scale, size=size)
    imag = rng.normal(0.0, scale, size=size)
    return real + 1j * imag


def drift_propagator(H: Operator, jump: Operator, dt: float) -> np.ndarray:
    """exp(−i H_eff dt) as a dense matrix."""
    h_eff = H.to_dense() - 0.5j * (jump.matrix.conj().T @ jump.matrix).toarray()
    return la.expm(-1j * dt * h_eff)


class SSEKernel:
    """Cached matrices for repeated steps on raw amplitude vectors."""

    def __init__(self, H: Operator, jump: Operator, dt: float, scheme: str = "exponential",
                 propagator: Optional[np.ndarray] = None):
        if H.space != jump.space:
            raise SpaceError("H and jump must share one space")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown SSE scheme '{scheme}', expected one of {SCHEMES}")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.space = H.space
        self.dt = dt
        self.jump = jump.matrix.tocsr()
        self.jump_dag = jump.matrix.conj().T.tocsr()
        self.h_eff = (H.matrix - 0.5j * (self.jump_dag @ self.jump)).tocsr()
        if propagator is None and scheme == "exponential":
            propagator = drift_propagator(H, jump, dt)
        self.propagator = propagator

    def step(self, v: np.ndarray, noise: complex) -> Tuple[np.ndarray, complex]:
        norm2 = float(np.real(np.vdot(v, v)))
        jv = self.jump @ v
        dq = np.conj(np.vdot(v, jv)) / norm2 * self.dt + noise
        if self.propagator is not None:
            drift = self.propagator @ v
        else:
            drift = v - 1j * self.dt * (self.h_eff @ v)
        new = drift + jv * dq
        norm = float(np.linalg.norm(new))
        if not norm > COLLAPSE_TOL:
            raise NormCollapseError(f"state norm {norm:.3e} collapsed below {COLLAPSE_TOL:.0e}; reduce dt")
        return new / norm, complex(dq)


def sse_step(
    psi: StateVector,
    H: Operator,
    jump: Operator,
    dt: float,
    noise: complex,
    propagator: Optional[np.ndarray] = None,
) -> Tuple[StateVector, complex]:
    """
    One heterodyne SSE step.

    Args:
        psi: current normalized state
        H, jump: Hamiltonian and √(2κ)a
        dt: time step
        noise: complex Wiener increment dZ
        propagator: optional precomputed exp(−iH_eff dt) for the drift

    Returns:
        (renormalized state, dq used for the current)
    """
    if abs(psi.norm - 1.0) > 1e-10:
        raise ValueError(f"psi must be normalized (norm={psi.norm:.12f})")
    if psi.space != H.space:
        raise SpaceError("state and operators live on different spaces")
    scheme = "euler" if propagator is None else "exponential"
    kernel = SSEKernel(H, jump, dt, scheme, propagator)
    v, dq = kernel.step(psi.amplitudes, noise)
    return StateVector(v, psi.space), dq
