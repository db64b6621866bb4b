from src.cavity_sim.open_system.model import (
    INITIAL_STATES,
    OpenModelParams,
    build_open_system,
    named_initial_state,
    restricted_initial_state,
)
from src.cavity_sim.open_system.master import (
    MasterTrajectory,
    SteadyStateResult,
    evolve_master,
    liouvillian,
    steady_state,
    tail_population,
)
from src.cavity_sim.open_system.wigner import (
    WignerGrid,
    WignerPeak,
    field_moments,
    find_wigner_peaks,
    quadrature_distribution,
    recommended_half_width,
    segment_minimum,
    wigner,
    wigner_displaced_parity,
)
from src.cavity_sim.open_system.dressed import branch_transition_element, dressed_state
from src.cavity_sim.open_system.statistics import PhotonStatistics, photon_statistics, sector_populations

__all__ = [
    "INITIAL_STATES", "OpenModelParams", "build_open_system", "named_initial_state", "restricted_initial_state",
    "MasterTrajectory", "SteadyStateResult", "evolve_master", "liouvillian",
    "steady_state", "tail_population",
    "WignerGrid", "WignerPeak", "field_moments", "find_wigner_peaks",
    "quadrature_distribution", "recommended_half_width", "segment_minimum",
    "wigner", "wigner_displaced_parity",
    "branch_transition_element", "dressed_state",
    "PhotonStatistics", "photon_statistics", "sector_populations",
]
