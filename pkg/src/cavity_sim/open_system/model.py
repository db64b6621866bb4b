"""
Driven, lossy cavity coupled to an atom in the restricted momentum space
{|0⟩, |k⟩}, written in the frame rotating at the cavity frequency:

    H = (ω_r/2) J3 + (Ω/2) J1 (a σ+ + a† σ−) + ε (a + a†)
    jump = √(2κ) a

σ3 J3 commutes with H and with the jump, so each parity sector evolves on
its own.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple
import logging

import numpy as np
import scipy.sparse as sp

from src.app.core.config import settings
from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert import (
    DensityMatrix,
    Operator,
    SpaceDescriptor,
    StateVector,
    basis_state,
    build_operator,
)

logger = logging.getLogger("cavity_sim.open_system.model")

STEP_SAFETY = 0.02


def restricted_initial_state(space: SpaceDescriptor, j3: int = 1, atom: str = "g") -> StateVector:
    """|atom, n=0, J3⟩; the default |g, 0, J3=+1⟩ sits in the σ3J3 = −1 sector."""
    return basis_state(space, photons=0, atom=atom, momentum=j3)


INITIAL_STATES = ("parity_minus", "parity_plus", "mixed")


def named_initial_state(space: SpaceDescriptor, name: str) -> StateVector:
    """
    Start state by name.

    ``parity_minus`` is |g,0,J3=+1⟩, ``parity_plus`` is |g,0,J3=−1⟩ and
    ``mixed`` is (|g,0,−1⟩ + i|e,0,−1⟩)/√2 with equal weight in both sectors.
    """
    if name == "parity_minus":
        return restricted_initial_state(space, j3=1)
    if name == "parity_plus":
        return restricted_initial_state(space, j3=-1)
    if name == "mixed":
        v = basis_state(space, 0, "g", -1).amplitudes + 1j * basis_state(space, 0, "e", -1).amplitudes
        return StateVector(v / np.sqrt(2.0), space)
    raise ValueError(f"unknown initial state '{name}', expected one of {INITIAL_STATES}")


@dataclass(frozen=True, eq=False)
class OpenModelParams:
    kappa: float
    omega: float
    omega_r: float
    epsilon: float
    n_max: int = field(default_factory=lambda: settings.n_max_open)
    initial_state: Optional[StateVector] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"κ must be > 0, got {self.kappa}")
        for name in ("omega", "omega_r", "epsilon"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"N_max must be an integer >= 2, got {self.n_max}")
        space = SpaceDescriptor.restricted(int(self.n_max))
        if self.initial_state is None:
            object.__setattr__(self, "initial_state", restricted_initial_state(space))
        elif self.initial_state.space != space:
            raise SpaceError(
                f"initial state lives on {self.initial_state.space.describe()}, "
                f"expected restricted motion with N_max={self.n_max}"
            )

    @property
    def space(self) -> SpaceDescriptor:
        return SpaceDescriptor.restricted(int(self.n_max))

    @property
    def eps_crit(self) -> float:
        return 0.5 * self.omega

    @property
    def max_rate(self) -> float:
        return max(self.omega, self.epsilon, self.kappa)

    @property
    def max_step(self) -> float:
        return STEP_SAFETY / self.max_rate

    def with_cutoff(self, n_max: int) -> "OpenModelParams":
        """Same model on a larger Fock space; the initial state is zero-padded."""
        return OpenModelParams(
            kappa=self.kappa, omega=self.omega, omega_r=self.omega_r, epsilon=self.epsilon,
            n_max=int(n_max), initial_state=self.initial_state.with_photon_cutoff(int(n_max)),
        )

    def with_epsilon(self, epsilon: float) -> "OpenModelParams":
        return OpenModelParams(
            kappa=self.kappa, omega=self.omega, omega_r=self.omega_r, epsilon=float(epsilon),
            n_max=self.n_max, initial_state=self.initial_state,
        )

    def initial_density(self) -> DensityMatrix:
        return DensityMatrix.from_state(self.initial_state)

    def describe(self) -> dict:
        return {
            "kappa": self.kappa, "omega": self.omega, "omega_r": self.omega_r,
            "epsilon": self.epsilon, "n_max": int(self.n_max),
        }


def build_open_system(p: OpenModelParams) -> Tuple[Operator, Operator]:
    """
    Hamiltonian and photon-loss jump operator.

    Returns:
        (H, jump) with jump = √(2κ) a, matching the dissipator
        κ(2aρa† − ρa†a − a†aρ).
    """
    space = p.space
    a = build_operator("annihilate", space)
    a_dag = build_operator("create", space)
    jc = build_operator("sigma_plus", space) @ a + build_operator("sigma_minus", space) @ a_dag
    coupling = build_operator("J1", space) @ jc

    matrix = (
        0.5 * p.omega_r * build_operator("J3", space).matrix
        + 0.5 * p.omega * coupling.matrix
        + p.epsilon * (a.matrix + a_dag.matrix)
    )
    matrix = sp.csr_matrix(matrix)
    # products of hermitian factors pick up rounding noise
    matrix = 0.5 * (matrix + matrix.conj().T)
    H = Operator(matrix.tocsr(), space, hermitian=True)
    jump = Operator(np.sqrt(2.0 * p.kappa) * a.matrix, space)
    logger.debug("Open system built: dim=%d, nnz(H)=%d", space.dim, H.matrix.nnz)
    return H, jump
