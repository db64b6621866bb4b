"""
Experiment pipeline: one runner per experiment kind.

Each runner takes the resolved parameter map, writes its tables and sidecars
through RunStorage and returns a PipelineResult with the scalars that go
into the run manifest. Closed-system times are given as Ωt, open-system
times in the units of the rates (κ = 1 by default).
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from src.app.core.config import settings
from src.cavity_sim.closed import (
    ClosedModelParams,
    ManifoldSpec,
    build_closed_hamiltonian,
    conditioned_external,
    evolve_factorized_2d,
    evolve_unitary,
    masked_ground_state,
    momentum_distribution,
    position_density,
    rabi_oracle,
    rabi_signal,
    schmidt_entropy,
)
from src.cavity_sim.hilbert import SpaceDescriptor, basis_state, build_operator, partial_trace
from src.cavity_sim.mean_field import MeanFieldParams, meanfield_sweep
from src.cavity_sim.open_system import (
    OpenModelParams,
    WignerGrid,
    build_open_system,
    evolve_master,
    find_wigner_peaks,
    named_initial_state,
    photon_statistics,
    segment_minimum,
    steady_state,
    wigner,
)
from src.cavity_sim.trajectories import (
    TrajectoryConfig,
    branch_correlation,
    detect_switches,
    dominant_frequency,
    ensemble_statistics,
    run_ensemble,
    run_trajectory,
    seed_configs,
)
from src.infra.storage import RunStorage

logger = logging.getLogger("cavity_sim.pipeline")

RECOIL_FREE_WINDOW = 40.0  # Ωt range where the recoil-free oracle is compared
ENVELOPE_WINDOW = (15.0, 25.0)  # Ωt range of the 1D vs 2D envelope comparison
MAX_2D_DENSITY_POINTS = 128


@dataclass
class PipelineResult:
    convergence: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    seeds: List[int] = field(default_factory=list)
    streams: List[int] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


# ==============================================================================
# CLOSED SYSTEM
# ==============================================================================

def _closed_params(params: dict, dims: int) -> ClosedModelParams:
    return ClosedModelParams(omega=params["omega"], omega_r=params["omega_r"], dims=dims)


def _omega_t(params: dict) -> np.ndarray:
    return np.linspace(0.0, params["t_end"], params["n_times"])


def _rabi_1d(params: dict, l_max: int, omega_t: np.ndarray) -> np.ndarray:
    n = params["n_excitations"]
    manifold = ManifoldSpec(n)
    space = SpaceDescriptor.ladder(n, l_max)
    times = omega_t / params["omega"]
    H = build_closed_hamiltonian(_closed_params(params, 1), manifold, space, t_max=float(times[-1]))
    psi0 = basis_state(space, photons=n - 1, atom="e", momentum=0)
    return rabi_signal(evolve_unitary(H, psi0, times, manifold=manifold))


def _rabi_2d(params: dict, omega_t: np.ndarray) -> np.ndarray:
    manifold = ManifoldSpec(params["n_excitations"])
    trajectory = evolve_factorized_2d(
        _closed_params(params, 2), manifold, omega_t / params["omega"], l_max_rotated=params["l_max"],
    )
    return trajectory.excited_probability()


def _oracle_deviation(omega_t: np.ndarray, p_e: np.ndarray, oracle: np.ndarray) -> float:
    window = omega_t <= RECOIL_FREE_WINDOW
    return float(np.max(np.abs(p_e[window] - oracle[window])))


def _envelope(omega_t: np.ndarray, p_e: np.ndarray) -> float:
    lo, hi = ENVELOPE_WINDOW
    window = (omega_t >= lo) & (omega_t <= hi)
    if not np.any(window):
        return float("nan")
    return float(np.mean(np.abs(p_e[window] - 0.5)))


def run_rabi1d(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    omega_t = _omega_t(params)
    scaled = np.sqrt(params["n_excitations"]) * omega_t
    p_e = _rabi_1d(params, params["l_max"], omega_t)
    oracle = rabi_oracle(1, scaled)
    storage.write_table(
        "rabi_1d.csv",
        pd.DataFrame({"omega_t": omega_t, "P_e": p_e, "P_e_recoil_free": oracle}),
        units={"omega_t": "1"},
    )
    deviation = _oracle_deviation(omega_t, p_e, oracle)
    logger.info("1D Rabi signal: max deviation from the recoil-free walk %.3e", deviation)
    return PipelineResult(summary={
        "max_deviation_recoil_free": deviation,
        "recoil_free_window_omega_t": RECOIL_FREE_WINDOW,
        "final_P_e": float(p_e[-1]),
    })


def run_rabi2d(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    omega_t = _omega_t(params)
    scaled = np.sqrt(params["n_excitations"]) * omega_t
    p_e = _rabi_2d(params, omega_t)
    oracle = rabi_oracle(2, scaled)
    table = {"omega_t": omega_t, "P_e_2d": p_e, "P_e_2d_recoil_free": oracle}
    summary = {
        "max_deviation_recoil_free_2d": _oracle_deviation(omega_t, p_e, oracle),
        "envelope_2d": _envelope(omega_t, p_e),
    }
    if params.get("compare_1d"):
        p_e_1d = _rabi_1d(params, params["l_max_1d"], omega_t)
        oracle_1d = rabi_oracle(1, scaled)
        table.update({"P_e_1d": p_e_1d, "P_e_1d_recoil_free": oracle_1d})
        summary["max_deviation_recoil_free_1d"] = _oracle_deviation(omega_t, p_e_1d, oracle_1d)
        summary["envelope_1d"] = _envelope(omega_t, p_e_1d)
        summary["envelope_2d_below_1d"] = bool(summary["envelope_2d"] < summary["envelope_1d"])
    summary["envelope_window_omega_t"] = list(ENVELOPE_WINDOW)
    storage.write_table("rabi.csv", pd.DataFrame(table), units={"omega_t": "1"})
    logger.info("2D Rabi signal written (%d points, compare_1d=%s)", omega_t.size, bool(params.get("compare_1d")))
    return PipelineResult(summary=summary)


def _distribution_summary(momenta: np.ndarray, p: np.ndarray) -> dict:
    total = float(p.sum())
    if total == 0.0:
        return {"total": 0.0}
    mean_sq = float(p @ momenta.astype(float) ** 2) / total
    return {
        "total": total,
        "odd_fraction": float(p[momenta % 2 != 0].sum()) / total,
        "rms_momentum": float(np.sqrt(mean_sq)),
        "peak_abs_momentum": int(abs(momenta[np.argmax(p)])),
    }


def run_walk(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    n = params["n_excitations"]
    manifold = ManifoldSpec(n)
    t_end = params["t_end"] / params["omega"]
    times = np.array([0.0, t_end])

    if params["dims"] == 1:
        space = SpaceDescriptor.ladder(n, params["l_max"])
        H = build_closed_hamiltonian(_closed_params(params, 1), manifold, space, t_max=t_end)
        psi = evolve_unitary(H, basis_state(space, photons=n - 1, atom="e", momentum=0), times,
                             manifold=manifold)[-1]
        excited = momentum_distribution(psi, "e")
        ground = momentum_distribution(psi, "g")
        l = excited.momenta[0]
        storage.write_table("walk_1d.csv", pd.DataFrame({"l": l, "P_e": excited.joint, "P_g": ground.joint}),
                            units={"l": "ħk"})
        return PipelineResult(summary={
            "omega_t": params["t_end"],
            "excited": _distribution_summary(l, excited.joint),
            "ground": _distribution_summary(l, ground.joint),
        })

    walk = evolve_factorized_2d(_closed_params(params, 2), manifold, times, l_max_rotated=params["l_max"])
    dist = momentum_distribution(walk[-1], "e")
    l1, l2 = np.meshgrid(dist.momenta[0], dist.momenta[1], indexing="ij")
    keep = dist.joint > 0
    storage.write_table(
        "walk_2d_joint.csv",
        pd.DataFrame({"l1": l1[keep], "l2": l2[keep], "P_e": dist.joint[keep]}),
        units={"l1": "ħk", "l2": "ħk"},
    )
    s, d = np.meshgrid(dist.rotated_momenta, dist.rotated_momenta, indexing="ij")
    keep = dist.rotated_joint > 0
    storage.write_table(
        "walk_2d_rotated.csv",
        pd.DataFrame({"s": s[keep], "d": d[keep], "P_e": dist.rotated_joint[keep]}),
        units={"s": "ħk", "d": "ħk"},
    )
    storage.write_table(
        "walk_2d_marginals.csv",
        pd.DataFrame({
            "m": dist.rotated_momenta,
            "P_s": dist.rotated_marginals[0],
            "P_d": dist.rotated_marginals[1],
        }),
        units={"m": "ħk"},
    )
    return PipelineResult(summary={
        "omega_t": params["t_end"],
        "P_e": dist.total,
        "rotated_s": _distribution_summary(dist.rotated_momenta, dist.rotated_marginals[0]),
        "rotated_d": _distribution_summary(dist.rotated_momenta, dist.rotated_marginals[1]),
    })


def run_masked_ground(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    n = params["n_excitations"]
    dims = params["dims"]
    manifold = ManifoldSpec(n)
    l_max = params["l_max"] if dims == 1 else (params["l_max"],) * dims
    space = SpaceDescriptor.ladder(n, l_max)
    H = build_closed_hamiltonian(_closed_params(params, dims), manifold, space)
    result = masked_ground_state(H, manifold, omega=params["omega"])

    rows = []
    for k, level in enumerate(result.levels):
        row = {"level": k, "energy": level.energy / params["omega"], "residual": level.residual}
        row.update({f"parity_{name}": value for name, value in level.parity.items()})
        rows.append(row)
    storage.write_table("masked_levels.csv", pd.DataFrame(rows), units={"energy": "Ω"})

    upper = conditioned_external(result.state, +1, n)
    lower = conditioned_external(result.state, -1, n)
    overlap = float(abs(np.vdot(upper, lower)) / (np.linalg.norm(upper) * np.linalg.norm(lower)))
    summary = {
        "energy": result.energy / params["omega"],
        "degeneracy": result.degeneracy,
        "branch_overlap": overlap,
        "branch_weights": {"+": float(np.sum(np.abs(upper) ** 2)), "-": float(np.sum(np.abs(lower) ** 2))},
    }

    if dims == 1:
        grid = np.linspace(0.0, 2 * np.pi, params["grid_points"], endpoint=False)
        plus = position_density(upper, grid)
        minus = position_density(lower, grid)
        storage.write_table("masked_density.csv",
                            pd.DataFrame({"kx": grid, "density_plus": plus, "density_minus": minus}),
                            units={"kx": "rad"})
        summary["peak_kx"] = {"+": float(grid[np.argmax(plus)]), "-": float(grid[np.argmax(minus)])}
    else:
        grid = np.linspace(0.0, 2 * np.pi, min(params["grid_points"], MAX_2D_DENSITY_POINTS), endpoint=False)
        plus = position_density(upper, grid)
        minus = position_density(lower, grid)
        x, y = np.meshgrid(grid, grid, indexing="ij")
        storage.write_table(
            "masked_density_2d.csv",
            pd.DataFrame({"kx": x.ravel(), "ky": y.ravel(),
                          "density_plus": plus.ravel(), "density_minus": minus.ravel()}),
            units={"kx": "rad", "ky": "rad"},
        )
        summary["schmidt_entropy"] = {"+": schmidt_entropy(upper), "-": schmidt_entropy(lower)}
        summary["schmidt_entropy_reference"] = float(np.log(2.0))

    logger.info("Masked ground state: E=%.6g Ω, degeneracy %d", summary["energy"], result.degeneracy)
    return PipelineResult(
        convergence={"max_residual": max((lvl.residual for lvl in result.levels), default=0.0)},
        summary=summary,
    )


# ==============================================================================
# MEAN FIELD
# ==============================================================================

def run_meanfield_sweep(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    p = MeanFieldParams(kappa=params["kappa"], omega=params["omega"], omega_r=params["omega_r"], epsilon=0.0)
    ratios = np.linspace(params["eps_ratio_min"], params["eps_ratio_max"], params["eps_points"])
    frame = meanfield_sweep(p, ratios, jobs=jobs)
    storage.write_table("meanfield_sweep.csv", frame, units={"leading_re_lambda": "κ"})

    nontrivial = frame[frame["kind"] == "nontrivial"]
    summary = {
        "eps_crit": p.eps_crit,
        "limiting_amplitude": p.limiting_amplitude,
        "rows": int(len(frame)),
        "nontrivial_rows": int(len(nontrivial)),
        "nontrivial_unstable": int((nontrivial["stability"] == "unstable").sum()),
        "stability_counts": frame["stability"].value_counts().to_dict(),
    }
    return PipelineResult(
        convergence={"max_residual": float(frame["residual"].max()) if len(frame) else 0.0},
        summary=summary,
    )


# ==============================================================================
# OPEN SYSTEM
# ==============================================================================

def _epsilon(params: dict) -> float:
    if params.get("epsilon") is not None:
        return float(params["epsilon"])
    return float(params["eps_ratio"]) * 0.5 * params["omega"]


def _open_model(params: dict) -> OpenModelParams:
    space = SpaceDescriptor.restricted(params["n_max"])
    return OpenModelParams(
        kappa=params["kappa"], omega=params["omega"], omega_r=params["omega_r"],
        epsilon=_epsilon(params), n_max=params["n_max"],
        initial_state=named_initial_state(space, params["initial"]),
    )


def run_wigner_steady(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    model = _open_model(params)

    def _checkpoint(rho, t):
        storage.save_checkpoint("steady_checkpoint.npz", rho, t, extra={"model": model.describe()})

    result = steady_state(
        model,
        tol=settings.steady_tol,
        probe_window=params["probe_window"],
        t_max=params["t_max"],
        method=params["steady_method"],
        checkpoint=_checkpoint,
    )
    rho = result.rho
    field_rho = partial_trace(rho, ["photon"])
    grid = wigner(field_rho, WignerGrid(params["grid_half_width"], params["grid_step"]), jobs=jobs)
    storage.write_table("wigner.csv", grid.to_frame(), units={"x": "√photons", "p": "√photons"})
    storage.write_table(
        "wigner_marginals.csv",
        pd.DataFrame({"q": grid.axis, "W_real": grid.marginal("real"), "W_imag": grid.marginal("imag")}),
        units={"q": "√photons"},
    )

    stats = photon_statistics(rho)
    storage.write_table("photon_distribution.csv",
                        pd.DataFrame({"n": np.arange(stats.distribution.size), "P_n": stats.distribution}))

    peaks = find_wigner_peaks(grid)
    summary = {
        "model": result.params.describe(),
        "eps_over_eps_crit": model.epsilon / model.eps_crit,
        "n_peaks": len(peaks),
        "peaks": [{"alpha": p.alpha, "value": p.value, "prominence": p.prominence} for p in peaks],
        "wigner_normalization": grid.normalization(),
        "mean_n": stats.mean_n,
        "g2": stats.g2,
        "mandel_q": stats.mandel_q,
        "mean_a": stats.mean_a,
        "sector_populations": result.sector_populations,
    }
    if len(peaks) >= 2:
        value, location = segment_minimum(grid, peaks[0].alpha, peaks[1].alpha)
        summary["segment_minimum"] = {"value": value, "alpha": location}
    storage.write_json("steady_summary.json", summary)

    logger.info("Steady state: %d Wigner peak(s), ⟨n⟩=%.3f, converged=%s", len(peaks), stats.mean_n, result.converged)
    return PipelineResult(
        convergence={
            "converged": result.converged,
            "residual": result.residual,
            "t_reached": result.t_reached,
            "min_eigenvalue": result.min_eigenvalue,
            "restarts": result.restarts,
            "n_max": int(result.params.n_max),
        },
        summary=summary,
        warnings=list(result.warnings) + list(grid.warnings),
    )


# ==============================================================================
# TRAJECTORIES
# ==============================================================================

TRAJECTORY_UNITS = {"t": "1/κ", "re_I": "√κ", "im_I": "√κ"}


def _trajectory_config(params: dict, stream: int = 0) -> TrajectoryConfig:
    return TrajectoryConfig(
        model=_open_model(params),
        duration=params["t_end"],
        kappa_d=params["kappa_d"],
        seed=params["seed"],
        stream=stream,
        dt=params["dt"],
        record_stride=params["record_stride"],
        scheme=params["scheme"],
    )


def run_single_trajectory(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    cfg = _trajectory_config(params, stream=params.get("stream", 0))
    record = run_trajectory(cfg)
    storage.write_table("trajectory.csv", record.to_frame(), units=TRAJECTORY_UNITS)

    report = detect_switches(record)
    correlation = branch_correlation(record)
    frequency = dominant_frequency(record.times, record.sigma_minus)
    storage.write_json("trajectory.json", {
        "config": cfg.describe(),
        "seed": record.seed,
        "stream": record.stream,
        "bit_generator": settings.rng_bit_generator,
        "switches": report.to_dict(),
    })

    warnings = list(record.warnings)
    if report.flag:
        warnings.append(f"switch detection: {report.flag}")
    logger.info("Trajectory: %d switch(es), branch correlation %.3f", len(report.switch_times), correlation)
    return PipelineResult(
        convergence={"parity_drift": record.parity_drift},
        summary={
            "n_switches": len(report.switch_times),
            "switch_times": report.switch_times,
            "bimodal": report.bimodal,
            "branch_correlation": correlation,
            "sigma_minus_frequency": frequency,
            "max_abs_sigma_minus": float(np.max(np.abs(record.sigma_minus))),
            "omega_r": params["omega_r"],
        },
        seeds=[record.seed],
        streams=[record.stream],
        warnings=warnings,
    )


def run_ensemble_comparison(params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    base = _trajectory_config(params)
    records = run_ensemble(seed_configs(base, params["n_seeds"]), jobs=jobs)
    field_stats = ensemble_statistics(records, "field")
    photon_stats = ensemble_statistics(records, "photons")

    model = base.model
    H, jump = build_open_system(model)
    master = evolve_master(
        H, jump, model.initial_density(), t_end=base.duration, dt=base.dt,
        record_every=base.record_stride,
        observables={"a": build_operator("annihilate", model.space), "n": build_operator("number", model.space)},
        rate=model.max_rate,
    )
    if not np.allclose(field_stats.times, master.times):
        raise ValueError("ensemble and master-equation records do not share a time grid")

    a_ref = master.observables["a"]
    n_ref = np.real(master.observables["n"])
    storage.write_table("ensemble.csv", pd.DataFrame({
        "t": field_stats.times,
        "re_a": field_stats.mean.real, "im_a": field_stats.mean.imag, "a_stderr": field_stats.stderr,
        "re_a_master": a_ref.real, "im_a_master": a_ref.imag,
        "n": np.real(photon_stats.mean), "n_stderr": photon_stats.stderr, "n_master": n_ref,
    }), units={"t": "1/κ"})

    within_a = field_stats.within(a_ref, n_sigma=3.0)
    within_n = photon_stats.within(n_ref, n_sigma=3.0)
    warnings = []
    if not within_a.all():
        warnings.append(f"⟨a⟩ outside 3 stderr at {int((~within_a).sum())} of {within_a.size} records")
    if not within_n.all():
        warnings.append(f"⟨n⟩ outside 3 stderr at {int((~within_n).sum())} of {within_n.size} records")

    return PipelineResult(
        convergence={"master_trace_drift": master.trace_drift, "master_max_tail": master.max_tail},
        summary={
            "n_trajectories": field_stats.n_trajectories,
            "fraction_within_3_stderr_a": float(within_a.mean()),
            "fraction_within_3_stderr_n": float(within_n.mean()),
            "max_abs_deviation_a": float(np.max(np.abs(field_stats.mean - a_ref))),
            "max_abs_deviation_n": float(np.max(np.abs(photon_stats.mean - n_ref))),
        },
        seeds=field_stats.seeds,
        streams=field_stats.streams,
        warnings=warnings,
    )


RUNNERS: Dict[str, Callable[[dict, RunStorage, Optional[int]], PipelineResult]] = {
    "rabi1d": run_rabi1d,
    "rabi2d": run_rabi2d,
    "walk": run_walk,
    "masked_ground": run_masked_ground,
    "meanfield_sweep": run_meanfield_sweep,
    "wigner_steady": run_wigner_steady,
    "trajectory": run_single_trajectory,
    "ensemble": run_ensemble_comparison,
}


def run_pipeline(experiment: str, params: dict, storage: RunStorage, jobs: Optional[int] = None) -> PipelineResult:
    """
    Run one experiment into ``storage``.

    Args:
        experiment: experiment kind (see RUNNERS)
        params: fully resolved parameter map
        storage: run directory the outputs are written to
        jobs: joblib workers for sweeps, Wigner grids and ensembles

    Returns:
        PipelineResult for the run manifest.
    """
    runner = RUNNERS.get(experiment)
    if runner is None:
        raise ValueError(f"unknown experiment '{experiment}', expected one of {sorted(RUNNERS)}")
    jobs = jobs or settings.jobs
    logger.info("Running %s into %s (jobs=%d)", experiment, storage.base_path, jobs)
    return runner(params, storage, jobs)
