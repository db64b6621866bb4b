"""
Ensemble statistics over independent trajectory streams.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging

import numpy as np
from joblib import Parallel, delayed

from src.app.core.config import settings
from src.cavity_sim.trajectories.runner import HeterodyneRecord, TrajectoryConfig, run_trajectory

logger = logging.getLogger("cavity_sim.trajectories.ensemble")

MIN_SEEDS = 50


@dataclass
class EnsembleStatistics:
    observable: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_trajectories: int
    seeds: List[int]
    streams: List[int]

    def within(self, reference: np.ndarray, n_sigma: float = 3.0, floor: float = 0.0) -> np.ndarray:
        """Pointwise |mean − reference| ≤ n_sigma·stderr + floor (complex values use the modulus)."""
        return np.abs(self.mean - np.asarray(reference)) <= n_sigma * self.stderr + floor


def seed_configs(base: TrajectoryConfig, n: int, first_stream: int = 0) -> List[TrajectoryConfig]:
    """``n`` copies of ``base`` on consecutive SeedSequence streams."""
    return [base.with_stream(first_stream + k) for k in range(n)]


def run_ensemble(
    configs: Sequence[TrajectoryConfig],
    jobs: Optional[int] = None,
    min_seeds: int = MIN_SEEDS,
) -> List[HeterodyneRecord]:
    """One trajectory per config, one config per joblib task."""
    configs = list(configs)
    if len(configs) < min_seeds:
        raise ValueError(f"ensemble needs at least {min_seeds} trajectories, got {len(configs)}")
    keys = {(int(c.seed), c.stream) for c in configs}
    if len(keys) != len(configs):
        raise ValueError("ensemble contains repeated (seed, stream) pairs")
    jobs = jobs or settings.jobs
    logger.info("Running %d trajectories on %d worker(s)", len(configs), jobs)
    return Parallel(n_jobs=jobs)(delayed(run_trajectory)(cfg) for cfg in configs)


def ensemble_statistics(records: Sequence[HeterodyneRecord], observable: str) -> EnsembleStatistics:
    """
    Pointwise mean and standard error of one recorded series.

    Complex observables report stderr as √(var Re + var Im)/√N.
    """
    records = list(records)
    if len(records) < 2:
        raise ValueError("standard errors need at least two trajectories")
    times = records[0].times
    for rec in records[1:]:
        if rec.times.shape != times.shape or not np.allclose(rec.times, times):
            raise ValueError("trajectories were recorded on different time grids")
    stack = np.vstack([rec.observable(observable) for rec in records])
    n = stack.shape[0]
    if np.iscomplexobj(stack):
        var = stack.real.var(axis=0, ddof=1) + stack.imag.var(axis=0, ddof=1)
    else:
        var = stack.var(axis=0, ddof=1)
    stats = EnsembleStatistics(
        observable=observable,
        times=times,
        mean=stack.mean(axis=0),
        stderr=np.sqrt(var / n),
        n_trajectories=n,
        seeds=[rec.seed for rec in records],
        streams=[rec.stream for rec in records],
    )
    logger.debug("⟨%s⟩ over %d trajectories: max stderr %.3e", observable, n, float(np.max(stats.stderr)))
    return stats


def ensemble_average(
    configs: Sequence[TrajectoryConfig],
    observable: str = "field",
    jobs: Optional[int] = None,
    min_seeds: int = MIN_SEEDS,
) -> EnsembleStatistics:
    """
    Pointwise mean and standard error of one recorded observable.

    Args:
        configs: trajectory configurations differing only in seed/stream
        observable: a HeterodyneRecord series name ("field", "photons", ...)
        jobs: joblib workers (defaults to settings.jobs)
        min_seeds: smallest accepted ensemble

    Returns:
        EnsembleStatistics on the common record times.
    """
    return ensemble_statistics(run_ensemble(configs, jobs, min_seeds), observable)
