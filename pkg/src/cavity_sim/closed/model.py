"""
Closed-system model: parameters, excitation manifolds and Hamiltonians.

Frame: ħω_a(n + σ+σ−) is removed (ω_a = ω_c), so inside the manifold
{|e,n−1⟩, |g,n⟩} the Hamiltonian is kinetic energy plus the position
dependent Jaynes-Cummings coupling Ω·f(x)(aσ+ + a†σ−).

Coupling profiles f(x):
    1D  cos k1x1
    2D  cos k1x1 · sin k2x2
    3D  sin k1x1 · sin k2x2 · cos k3x3
with cos = (S+ + S−)/2 and sin = (S+ − S−)/2i in terms of ladder shifts.
"""
from dataclasses import dataclass
from typing import Optional, Tuple
import logging

import numpy as np
import scipy.sparse as sp

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert.operators import Operator, OperatorKind, build_operator
from src.cavity_sim.hilbert.space import E, G, SpaceDescriptor

logger = logging.getLogger("cavity_sim.closed.model")

# per-axis profile factor, indexed by dims
PROFILES = {
    1: ("cos",),
    2: ("cos", "sin"),
    3: ("sin", "sin", "cos"),
}


@dataclass(frozen=True)
class ClosedModelParams:
    omega: float
    omega_r: float
    dims: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("Ω must be positive")
        if self.omega_r < 0:
            raise ValueError("ω_r must be non-negative")
        if self.dims not in PROFILES:
            raise ValueError(f"dims must be 1, 2 or 3, got {self.dims}")

    @property
    def coupling_profile(self) -> Tuple[str, ...]:
        return PROFILES[self.dims]


@dataclass(frozen=True)
class ManifoldSpec:
    """Doublet {|e,n−1⟩,|g,n⟩} for n ≥ 1; n = 0 is the unpaired |g,0⟩."""

    n_excitations: int

    def __post_init__(self):
        if self.n_excitations < 0:
            raise ValueError("n_excitations must be >= 0")

    @classmethod
    def ground(cls) -> "ManifoldSpec":
        return cls(0)

    def check_fits(self, space: SpaceDescriptor) -> None:
        if self.n_excitations > space.photon_cutoff:
            raise SpaceError(
                f"manifold n={self.n_excitations} does not fit photon cutoff {space.photon_cutoff}"
            )

    def mask(self, space: SpaceDescriptor) -> np.ndarray:
        self.check_fits(space)
        labels = space.grids()
        photons, atom = labels[0], labels[1]
        n = self.n_excitations
        return ((atom == E) & (photons == n - 1)) | ((atom == G) & (photons == n))

    def indices(self, space: SpaceDescriptor) -> np.ndarray:
        return np.flatnonzero(self.mask(space))


def _shift_profile(space: SpaceDescriptor, axis: int, kind: str) -> sp.csr_matrix:
    plus = build_operator(OperatorKind.SHIFT_PLUS, space, axis=axis).matrix
    minus = build_operator(OperatorKind.SHIFT_MINUS, space, axis=axis).matrix
    if kind == "cos":
        return 0.5 * (plus + minus)
    return (plus - minus) / 2j


def jaynes_cummings_term(space: SpaceDescriptor) -> sp.csr_matrix:
    """aσ+ + a†σ−"""
    a = build_operator(OperatorKind.ANNIHILATE, space).matrix
    ad = build_operator(OperatorKind.CREATE, space).matrix
    sp_ = build_operator(OperatorKind.SIGMA_PLUS, space).matrix
    sm = build_operator(OperatorKind.SIGMA_MINUS, space).matrix
    return a @ sp_ + ad @ sm


def _project(matrix: sp.spmatrix, manifold: ManifoldSpec, space: SpaceDescriptor) -> sp.csr_matrix:
    proj = sp.diags(manifold.mask(space).astype(float), format="csr")
    return (proj @ matrix @ proj).tocsr()


def _check_space(params: ClosedModelParams, manifold: ManifoldSpec, space: SpaceDescriptor) -> None:
    if not space.is_ladder:
        raise SpaceError("closed-system Hamiltonians require ladder motion")
    if space.motion.dims != params.dims:
        raise SpaceError(f"space has {space.motion.dims} motion dims, params ask for {params.dims}")
    manifold.check_fits(space)


def estimate_spread(params: ClosedModelParams, manifold: ManifoldSpec, t_max: float) -> float:
    """Ladder steps reached by the walk after t_max (≈ Ω√n t per axis)."""
    return params.omega * np.sqrt(max(manifold.n_excitations, 1)) * t_max


def build_closed_hamiltonian(
    params: ClosedModelParams,
    manifold: ManifoldSpec,
    space: SpaceDescriptor,
    t_max: Optional[float] = None,
) -> Operator:
    """
    Hamiltonian restricted to an excitation manifold.

    Args:
        params: coupling/recoil parameters and dimensionality
        manifold: excitation manifold the dynamics lives in
        space: ladder space (photon cutoff must hold the manifold)
        t_max: optional evolution horizon, used for the leakage warning

    Returns:
        Hermitian Operator acting as zero outside the manifold.
    """
    _check_space(params, manifold, space)
    if t_max is not None:
        spread = estimate_spread(params, manifold, t_max)
        if spread + 10 > min(space.motion.l_max):
            logger.warning(
                "l_max=%s is leakage-prone: estimated walk spread %.0f steps by t=%.1f",
                space.motion.l_max, spread, t_max,
            )

    kinetic = build_operator(OperatorKind.KINETIC, space, omega_r=params.omega_r).matrix
    profile = None
    for axis, kind in enumerate(params.coupling_profile):
        factor = _shift_profile(space, axis, kind)
        profile = factor if profile is None else profile @ factor
    coupling = params.omega * (profile @ jaynes_cummings_term(space))
    matrix = _project(kinetic + coupling, manifold, space)
    logger.debug("Built %dD closed Hamiltonian (nnz=%d)", params.dims, matrix.nnz)
    return Operator(matrix, space, hermitian=True)


def rotated_hamiltonians(
    params: ClosedModelParams,
    manifold: ManifoldSpec,
    space: SpaceDescriptor,
) -> Tuple[Operator, Operator]:
    """
    Split of the 2D Hamiltonian into correlated and anticorrelated parts.

    With s = l1 + l2 and d = l1 − l2, cos θ1 sin θ2 = ½[sin(θ1+θ2) − sin(θ1−θ2)]
    and l1² + l2² = (s² + d²)/2, so H = H_corr + H_anti with
        H_corr = ω_r s²/2 + (Ω/2) sin(θ1+θ2) (aσ+ + a†σ−)
        H_anti = ω_r d²/2 − (Ω/2) sin(θ1−θ2) (aσ+ + a†σ−)
    The two parts commute away from the ladder truncation edges.
    """
    if params.dims != 2:
        raise SpaceError("rotated decomposition is defined for dims=2")
    _check_space(params, manifold, space)
    labels = space.grids()
    s = (labels[2] + labels[3]).astype(float)
    d = (labels[2] - labels[3]).astype(float)

    p1 = build_operator(OperatorKind.SHIFT_PLUS, space, axis=0).matrix
    m1 = build_operator(OperatorKind.SHIFT_MINUS, space, axis=0).matrix
    p2 = build_operator(OperatorKind.SHIFT_PLUS, space, axis=1).matrix
    m2 = build_operator(OperatorKind.SHIFT_MINUS, space, axis=1).matrix
    sin_sum = (p1 @ p2 - m1 @ m2) / 2j
    sin_diff = (p1 @ m2 - m1 @ p2) / 2j
    jc = jaynes_cummings_term(space)

    h_corr = sp.diags(0.5 * params.omega_r * s ** 2) + 0.5 * params.omega * (sin_sum @ jc)
    h_anti = sp.diags(0.5 * params.omega_r * d ** 2) - 0.5 * params.omega * (sin_diff @ jc)
    return (
        Operator(_project(h_corr, manifold, space), space, hermitian=True),
        Operator(_project(h_anti, manifold, space), space, hermitian=True),
    )


def interior_mask(space: SpaceDescriptor, margin: int = 2) -> np.ndarray:
    """Basis states with every |l_m| ≤ l_max − margin (away from truncation edges)."""
    labels = space.grids()
    mask = np.ones(space.dim, dtype=bool)
    for m, l_max in enumerate(space.motion.l_max):
        mask &= np.abs(labels[2 + m]) <= l_max - margin
    return mask
