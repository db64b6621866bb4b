"""
Property checks for the figure runs.

Every check reads the tables and the manifest of one run directory and
returns ``(passed, metrics)``; the runner adds ids and categories.
"""
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from src.app.schemas.responses import RunManifest
from src.utils.metrics import smooth_box

CheckResult = Tuple[bool, Dict]

RABI_TOL = 0.02
ODD_MASS_TOL = 1e-12
OVERLAP_TOL = 1e-3
ENTROPY_TOL = 0.05
RESIDUAL_TOL = 1e-9
ORIGIN_RADIUS = 0.5
SIGMA_MINUS_TOL = 1e-8
PARITY_TOL = 1e-6
WIGNER_MATCH_TOL = 1e-3
BRANCH_CORRELATION_MIN = 0.8


def _peak_count(values: np.ndarray, rel_prominence: float = 0.1) -> List[int]:
    padded = np.concatenate([[0.0], np.asarray(values, dtype=float), [0.0]])
    peaks, _ = signal.find_peaks(padded, prominence=rel_prominence * max(padded.max(), 1e-300))
    return list(peaks - 1)


def _even(momenta: np.ndarray, values: np.ndarray):
    keep = momenta % 2 == 0
    return momenta[keep], values[keep]


def check_rabi(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    metrics = {
        "max_deviation_1d": s.get("max_deviation_recoil_free_1d"),
        "envelope_1d": s.get("envelope_1d"),
        "envelope_2d": s.get("envelope_2d"),
    }
    passed = (metrics["max_deviation_1d"] is not None and metrics["max_deviation_1d"] < RABI_TOL
              and bool(s.get("envelope_2d_below_1d")))
    return passed, metrics


def check_walk_1d(run_dir: Path, manifest: RunManifest) -> CheckResult:
    frame = pd.read_csv(run_dir / "walk_1d.csv")
    l = frame["l [ħk]"].to_numpy()
    p = frame["P_e"].to_numpy()
    top = p.max()
    maxima = l[p >= top * (1 - 1e-9)]
    p0 = float(p[l == 0][0])
    metrics = {
        "odd_mass": float(p[l % 2 != 0].sum()),
        "global_maxima": maxima.tolist(),
        "p0_over_max": p0 / top,
    }
    passed = (metrics["odd_mass"] < ODD_MASS_TOL and maxima.size == 2 and maxima.sum() == 0
              and p0 < 0.5 * top)
    return passed, metrics


def check_walk_2d(run_dir: Path, manifest: RunManifest) -> CheckResult:
    marginals = pd.read_csv(run_dir / "walk_2d_marginals.csv")
    m = marginals["m [ħk]"].to_numpy()
    s_even = _even(m, marginals["P_s"].to_numpy())[1]
    d_even = _even(m, marginals["P_d"].to_numpy())[1]
    s_peaks = _peak_count(s_even)
    d_peaks = _peak_count(d_even)

    joint = pd.read_csv(run_dir / "walk_2d_joint.csv")
    l1_marginal = joint.groupby("l1 [ħk]")["P_e"].sum()
    smoothed = smooth_box(l1_marginal.to_numpy())
    metrics = {
        "rotated_s_peaks": len(s_peaks),
        "rotated_d_peaks": len(d_peaks),
        "l1_marginal_unique_max": int(np.sum(smoothed >= smoothed.max() * (1 - 1e-9))) == 1,
    }
    passed = len(s_peaks) == 2 and len(d_peaks) == 2
    return passed, metrics


def check_masked_1d(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    x_plus = s["peak_kx"]["+"]
    x_minus = s["peak_kx"]["-"]
    metrics = {
        "degeneracy": s["degeneracy"],
        "peak_kx_plus": x_plus,
        "peak_kx_minus": x_minus,
        "branch_overlap": s["branch_overlap"],
    }
    tol = 0.05
    passed = (abs(x_plus - np.pi) < tol and min(x_minus, 2 * np.pi - x_minus) < tol
              and s["branch_overlap"] < OVERLAP_TOL)
    return passed, metrics


def check_masked_2d(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    entropy = s["schmidt_entropy"]["+"]
    metrics = {"schmidt_entropy": entropy, "reference": s["schmidt_entropy_reference"]}
    return abs(entropy - np.log(2.0)) < ENTROPY_TOL, metrics


def check_meanfield(run_dir: Path, manifest: RunManifest) -> CheckResult:
    frame = pd.read_csv(run_dir / "meanfield_sweep.csv")
    trivial = frame[frame["kind"] == "trivial"]
    nontrivial = frame[frame["kind"] == "nontrivial"]
    metrics = {
        "points": int(frame["eps_over_eps_crit"].nunique()),
        "trivial_max_residual": float(trivial["residual"].max()),
        "trivial_all_stable": bool((trivial["stability"] == "stable").all()),
        "nontrivial_rows": int(len(nontrivial)),
        "nontrivial_max_residual": float(nontrivial["residual"].max()) if len(nontrivial) else 0.0,
        "nontrivial_all_unstable": bool((nontrivial["stability"] == "unstable").all()),
    }
    passed = (metrics["trivial_max_residual"] < RESIDUAL_TOL and metrics["trivial_all_stable"]
              and metrics["nontrivial_max_residual"] < RESIDUAL_TOL and metrics["nontrivial_all_unstable"])
    return passed, metrics


def _peak_alphas(summary: dict) -> List[complex]:
    return [complex(p["alpha"]["re"], p["alpha"]["im"]) if isinstance(p["alpha"], dict) else complex(p["alpha"])
            for p in summary["peaks"]]


def check_wigner_single(run_dir: Path, manifest: RunManifest) -> CheckResult:
    alphas = _peak_alphas(manifest.summary)
    metrics = {"n_peaks": len(alphas), "peak_radius": [abs(a) for a in alphas]}
    return len(alphas) == 1 and abs(alphas[0]) < ORIGIN_RADIUS, metrics


def check_wigner_double(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    alphas = _peak_alphas(s)
    step = manifest.config["params"]["grid_step"]
    metrics = {"n_peaks": len(alphas)}
    if len(alphas) != 2:
        return False, metrics
    mirror = abs(alphas[0] + alphas[1])
    segment = s.get("segment_minimum") or {}
    metrics.update({
        "mirror_offset": mirror,
        "segment_minimum": segment.get("value"),
    })
    passed = mirror <= 2 * step and segment.get("value") is not None and segment["value"] < 0
    return passed, metrics


def compare_sectors(run_minus: Path, run_plus: Path, minus: RunManifest, plus: RunManifest) -> CheckResult:
    w_minus = pd.read_csv(run_minus / "wigner.csv")["W"].to_numpy()
    w_plus = pd.read_csv(run_plus / "wigner.csv")["W"].to_numpy()
    pop_minus = minus.summary["sector_populations"]
    pop_plus = plus.summary["sector_populations"]
    metrics = {
        "max_wigner_difference": float(np.max(np.abs(w_minus - w_plus))),
        "sector_populations_minus_start": pop_minus,
        "sector_populations_plus_start": pop_plus,
    }
    supports_differ = pop_minus["-1"] > 0.5 and pop_plus["+1"] > 0.5
    return metrics["max_wigner_difference"] < WIGNER_MATCH_TOL and supports_differ, metrics


def check_unraveling(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    metrics = {
        "n_trajectories": s["n_trajectories"],
        "fraction_within_3_stderr_a": s["fraction_within_3_stderr_a"],
        "fraction_within_3_stderr_n": s["fraction_within_3_stderr_n"],
    }
    passed = s["fraction_within_3_stderr_a"] == 1.0 and s["fraction_within_3_stderr_n"] == 1.0
    return passed, metrics


def check_trajectory_control(run_dir: Path, manifest: RunManifest) -> CheckResult:
    s = manifest.summary
    drift = manifest.convergence.get("parity_drift")
    metrics = {"max_abs_sigma_minus": s["max_abs_sigma_minus"], "parity_drift": drift}
    return s["max_abs_sigma_minus"] < SIGMA_MINUS_TOL and drift is not None and drift < PARITY_TOL, metrics


def check_trajectory_batch(runs: List[Tuple[Path, RunManifest]]) -> CheckResult:
    """Switches across the batch, branch correlation and the ⟨σ−⟩ spectral peak."""
    switches = sum(m.summary["n_switches"] for _, m in runs)
    correlations = [m.summary["branch_correlation"] for _, m in runs if m.summary["branch_correlation"] is not None]
    omega = runs[0][1].config["params"]["omega"]
    frequencies = [m.summary["sigma_minus_frequency"] for _, m in runs]
    metrics = {
        "seeds": [m.seeds[0] for _, m in runs],
        "total_switches": switches,
        "bimodal_runs": sum(bool(m.summary["bimodal"]) for _, m in runs),
        "branch_correlations": correlations,
        "sigma_minus_frequencies": frequencies,
    }
    frequency_ok = all(0 < f / (2 * np.pi) < omega / 10 for f in frequencies)
    correlation_ok = bool(correlations) and all(abs(c) > BRANCH_CORRELATION_MIN for c in correlations)
    return switches >= 1 and correlation_ok and frequency_ok, metrics
