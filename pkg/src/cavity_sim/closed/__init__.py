from src.cavity_sim.closed.model import (
    ClosedModelParams,
    ManifoldSpec,
    build_closed_hamiltonian,
    interior_mask,
    rotated_hamiltonians,
)
from src.cavity_sim.closed.evolution import FactorizedTrajectory, evolve_factorized_2d, evolve_unitary
from src.cavity_sim.closed.observables import (
    MomentumDistribution,
    conditioned_external,
    momentum_distribution,
    position_density,
    rabi_signal,
    schmidt_entropy,
)
from src.cavity_sim.closed.oracles import overlap_oracle, rabi_oracle
from src.cavity_sim.closed.eigen import MaskedGroundState, masked_ground_state

__all__ = [
    "ClosedModelParams", "ManifoldSpec", "build_closed_hamiltonian", "interior_mask",
    "rotated_hamiltonians", "FactorizedTrajectory", "evolve_factorized_2d", "evolve_unitary",
    "MomentumDistribution", "conditioned_external", "momentum_distribution",
    "position_density", "rabi_signal", "schmidt_entropy", "overlap_oracle", "rabi_oracle",
    "MaskedGroundState", "masked_ground_state",
]
