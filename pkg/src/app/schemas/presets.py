"""
Per-experiment defaults and the figure presets.

Closed-system experiments measure rates in units of Ω, open-system ones in
units of κ. ``eps_ratio`` is ε/ε_crit with ε_crit = Ω/2.
"""
from typing import Any, Dict, List

from src.app.core.config import settings

EXPERIMENTS = (
    "rabi1d", "rabi2d", "walk", "masked_ground",
    "meanfield_sweep", "wigner_steady", "trajectory", "ensemble",
)

CLOSED_EXPERIMENTS = {"rabi1d", "rabi2d", "walk", "masked_ground"}

# parameters each experiment reads; anything else is rejected for that experiment
EXPERIMENT_PARAMS: Dict[str, set] = {
    "rabi1d": {"omega", "omega_r", "l_max", "n_excitations", "t_end", "n_times"},
    "rabi2d": {"omega", "omega_r", "l_max", "n_excitations", "t_end", "n_times", "compare_1d", "l_max_1d"},
    "walk": {"omega", "omega_r", "dims", "l_max", "n_excitations", "t_end"},
    "masked_ground": {"omega", "omega_r", "dims", "l_max", "n_excitations", "grid_points"},
    "meanfield_sweep": {"kappa", "omega", "omega_r", "eps_ratio_min", "eps_ratio_max", "eps_points"},
    "wigner_steady": {
        "kappa", "omega", "omega_r", "epsilon", "eps_ratio", "n_max", "initial",
        "grid_half_width", "grid_step", "steady_method", "probe_window", "t_max",
    },
    "trajectory": {
        "kappa", "omega", "omega_r", "epsilon", "eps_ratio", "n_max", "initial",
        "dt", "t_end", "kappa_d", "seed", "stream", "record_stride", "scheme",
    },
    "ensemble": {
        "kappa", "omega", "omega_r", "epsilon", "eps_ratio", "n_max", "initial",
        "dt", "t_end", "kappa_d", "seed", "record_stride", "scheme", "n_seeds",
    },
}


def experiment_defaults(experiment: str) -> Dict[str, Any]:
    """Fully populated defaults (settings-derived values resolved now)."""
    closed = {"omega": 1.0, "n_excitations": 1}
    open_system = {"kappa": 1.0, "omega": 20.0, "omega_r": 0.25, "initial": "parity_minus"}
    stochastic = {**open_system, "dt": settings.sse_dt, "kappa_d": 0.25, "seed": 0,
                  "record_stride": 100, "scheme": "exponential"}
    table = {
        "rabi1d": {**closed, "omega_r": 1e-4, "l_max": settings.l_max_1d, "t_end": 80.0, "n_times": 321},
        "rabi2d": {**closed, "omega_r": 1e-4, "l_max": settings.l_max_rotated_2d, "t_end": 80.0,
                   "n_times": 321, "compare_1d": False, "l_max_1d": settings.l_max_1d},
        "walk": {**closed, "omega_r": 1e-4, "dims": 1, "l_max": settings.l_max_1d, "t_end": 80.0},
        "masked_ground": {**closed, "omega_r": 1e-4, "dims": 1, "l_max": 40, "grid_points": 512},
        "meanfield_sweep": {"kappa": 1.0, "omega": 20.0, "omega_r": 0.25,
                            "eps_ratio_min": 0.0, "eps_ratio_max": 1.5, "eps_points": 61},
        "wigner_steady": {**open_system, "eps_ratio": 1.0, "n_max": settings.n_max_open,
                          "grid_half_width": settings.wigner_half_width, "grid_step": settings.wigner_step,
                          "steady_method": "krylov", "probe_window": settings.steady_probe_window,
                          "t_max": settings.steady_t_max},
        "trajectory": {**stochastic, "eps_ratio": 1.0, "n_max": settings.n_max_open, "t_end": 2000.0,
                       "stream": 0, "initial": "mixed"},
        "ensemble": {**stochastic, "omega": 4.0, "epsilon": 1.0, "n_max": 20, "t_end": 2.0,
                     "n_seeds": 100, "record_stride": 100},
    }
    return dict(table[experiment])


PRESETS: Dict[str, Dict[str, Any]] = {
    "fig1a": {
        "experiment": "rabi2d",
        "description": "1D and 2D Rabi signals at ω_r = 1e-4 Ω over Ωt ∈ [0, 80]",
        "params": {"omega_r": 1e-4, "t_end": 80.0, "compare_1d": True},
    },
    "fig1b": {
        "experiment": "walk",
        "description": "1D momentum random walk of the excited atom at Ωt = 80",
        "params": {"dims": 1, "omega_r": 1e-4, "t_end": 80.0},
    },
    "fig1cd": {
        "experiment": "walk",
        "description": "2D momentum random walk, joint and rotated distributions at Ωt = 80",
        "params": {"dims": 2, "omega_r": 1e-4, "t_end": 80.0, "l_max": settings.l_max_rotated_2d},
    },
    "fig2": {
        "experiment": "masked_ground",
        "description": "1D masked ground doublet, branch-conditioned wavepackets",
        "params": {"dims": 1, "omega_r": 1e-4, "l_max": 40},
    },
    "fig2_2d": {
        "experiment": "masked_ground",
        "description": "2D masked ground state and its Schmidt entropy",
        "params": {"dims": 2, "omega_r": 1e-3, "l_max": 16},
    },
    "fig3": {
        "experiment": "meanfield_sweep",
        "description": "Mean-field branches and stability for ε/ε_crit ∈ [0, 1.5]",
        "params": {"kappa": 1.0, "omega": 20.0, "omega_r": 0.25,
                   "eps_ratio_min": 0.0, "eps_ratio_max": 1.5, "eps_points": 61},
    },
    "fig4a": {
        "experiment": "wigner_steady",
        "description": "Blockade-regime steady Wigner distribution, ε = ε_crit/8",
        "params": {"omega": 20.0, "omega_r": 0.25, "eps_ratio": 0.125, "grid_half_width": 3.0,
                   "initial": "parity_minus"},
    },
    "fig4b": {
        "experiment": "wigner_steady",
        "description": "Ordered-regime steady Wigner distribution, ε = ε_crit",
        "params": {"omega": 20.0, "omega_r": 0.25, "eps_ratio": 1.0, "grid_half_width": 12.0,
                   "initial": "parity_minus"},
    },
    "fig4_smoke_a": {
        "experiment": "wigner_steady",
        "description": "Reduced blockade-regime steady state (Ω = 8κ, N_max = 40)",
        "params": {"omega": 8.0, "omega_r": 0.25, "eps_ratio": 0.125, "n_max": 40,
                   "grid_half_width": 3.0, "initial": "parity_minus"},
    },
    "fig4_smoke_b": {
        "experiment": "wigner_steady",
        "description": "Reduced ordered-regime steady state (Ω = 8κ, N_max = 40)",
        "params": {"omega": 8.0, "omega_r": 0.25, "eps_ratio": 1.0, "n_max": 40,
                   "grid_half_width": 8.0, "initial": "parity_minus"},
    },
    "fig6": {
        "experiment": "trajectory",
        "description": "Heterodyne trajectory from the mixed-parity start, ε = ε_crit, κ_D = 0.25κ",
        "params": {"omega": 20.0, "omega_r": 0.25, "eps_ratio": 1.0, "kappa_d": 0.25,
                   "t_end": 2000.0, "initial": "mixed", "seed": 1},
    },
    "fig6_control": {
        "experiment": "trajectory",
        "description": "Same trajectory from a single parity sector (⟨σ−⟩ stays zero)",
        "params": {"omega": 20.0, "omega_r": 0.25, "eps_ratio": 1.0, "kappa_d": 0.25,
                   "t_end": 2000.0, "initial": "parity_minus", "seed": 1},
    },
    "unraveling": {
        "experiment": "ensemble",
        "description": "100-trajectory ensemble against the master equation (N_max = 20, Ω = 4κ, ε = κ)",
        "params": {"omega": 4.0, "omega_r": 0.25, "epsilon": 1.0, "n_max": 20, "t_end": 2.0,
                   "dt": 1e-3, "record_stride": 100, "n_seeds": 100, "seed": 2024},
    },
}


def list_presets() -> List[Dict[str, str]]:
    return [
        {"name": name, "experiment": preset["experiment"], "description": preset["description"]}
        for name, preset in PRESETS.items()
    ]
