from src.cavity_sim.trajectories.sse import SSEKernel, drift_propagator, heterodyne_noise, sse_step
from src.cavity_sim.trajectories.runner import (
    HeterodyneRecord,
    TrajectoryConfig,
    make_generator,
    run_trajectory,
)
from src.cavity_sim.trajectories.switches import NO_BIMODALITY, SwitchReport, detect_switches
from src.cavity_sim.trajectories.ensemble import (
    EnsembleStatistics,
    ensemble_average,
    ensemble_statistics,
    run_ensemble,
    seed_configs,
)
from src.cavity_sim.trajectories.analysis import (
    branch_correlation,
    branch_fidelity,
    dominant_frequency,
    toy_conditioned_state,
)

__all__ = [
    "SSEKernel", "drift_propagator", "heterodyne_noise", "sse_step",
    "HeterodyneRecord", "TrajectoryConfig", "make_generator", "run_trajectory",
    "NO_BIMODALITY", "SwitchReport", "detect_switches",
    "EnsembleStatistics", "ensemble_average", "ensemble_statistics", "run_ensemble", "seed_configs",
    "branch_correlation", "branch_fidelity", "dominant_frequency", "toy_conditioned_state",
]
