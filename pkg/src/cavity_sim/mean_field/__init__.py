from src.cavity_sim.mean_field.equations import (
    MeanFieldParams,
    MeanFieldState,
    MeanFieldTrajectory,
    conserved_quantities,
    finite_difference_jacobian,
    mf_integrate,
    mf_jacobian,
    mf_rhs,
)
from src.cavity_sim.mean_field.steady import (
    BranchKind,
    SteadyBranch,
    localization_roots,
    mf_steady_states,
    transcendental_quartic,
    transcendental_roots,
)
from src.cavity_sim.mean_field.stability import Stability, StabilityReport, mf_stability
from src.cavity_sim.mean_field.sweep import meanfield_sweep

__all__ = [
    "MeanFieldParams", "MeanFieldState", "MeanFieldTrajectory", "conserved_quantities",
    "finite_difference_jacobian", "mf_integrate", "mf_jacobian", "mf_rhs",
    "BranchKind", "SteadyBranch", "localization_roots", "mf_steady_states",
    "transcendental_quartic", "transcendental_roots",
    "Stability", "StabilityReport", "mf_stability", "meanfield_sweep",
]
