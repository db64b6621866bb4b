from src.cavity_sim.hilbert.space import LadderMotion, RestrictedMotion, SpaceDescriptor
from src.cavity_sim.hilbert.operators import Operator, OperatorKind, build_operator, embed, parity_labels
from src.cavity_sim.hilbert.states import (
    DensityMatrix,
    ReducedDensityMatrix,
    StateVector,
    basis_state,
    check_leakage,
    edge_population,
    expectation,
    partial_trace,
)

__all__ = [
    "LadderMotion", "RestrictedMotion", "SpaceDescriptor",
    "Operator", "OperatorKind", "build_operator", "embed", "parity_labels",
    "DensityMatrix", "ReducedDensityMatrix", "StateVector", "basis_state",
    "check_leakage", "edge_population", "expectation", "partial_trace",
]
