"""
Drive sweep over steady branches and their stability (the quadrature table).
"""
from typing import Iterable, List, Optional
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.app.core.config import settings
from src.cavity_sim.mean_field.equations import MeanFieldParams
from src.cavity_sim.mean_field.stability import mf_stability
from src.cavity_sim.mean_field.steady import mf_steady_states

logger = logging.getLogger("cavity_sim.mean_field.sweep")

COLUMNS = [
    "eps_over_eps_crit", "branch", "kind", "root_set",
    "re_alpha_kappa_over_omega", "im_alpha_kappa_over_omega",
    "X", "Y", "Z", "cos_phi", "residual", "stability", "leading_re_lambda",
]


def _rows_at(p: MeanFieldParams) -> List[dict]:
    rows = []
    for branch in mf_steady_states(p):
        report = mf_stability(branch, p)
        s = branch.state
        rows.append({
            "eps_over_eps_crit": p.epsilon / p.eps_crit,
            "branch": branch.label,
            "kind": branch.kind.value,
            "root_set": branch.root_set or "",
            "re_alpha_kappa_over_omega": s.alpha.real * p.kappa / p.omega,
            "im_alpha_kappa_over_omega": s.alpha.imag * p.kappa / p.omega,
            "X": s.X,
            "Y": s.Y,
            "Z": s.Z,
            "cos_phi": branch.cos_phi,
            "residual": branch.residual,
            "stability": report.classification.value,
            "leading_re_lambda": report.leading.real,
        })
    return rows


def meanfield_sweep(
    p: MeanFieldParams,
    eps_ratios: Iterable[float],
    jobs: Optional[int] = None,
) -> pd.DataFrame:
    """
    Steady branches and stability for each ε = ratio·ε_crit.

    Args:
        p: base parameters (ε is replaced per point)
        eps_ratios: grid of ε/ε_crit values
        jobs: joblib workers (defaults to settings.jobs)

    Returns:
        One row per (ε, branch).
    """
    ratios = np.asarray(list(eps_ratios), dtype=float)
    if np.any(ratios < 0):
        raise ValueError("ε/ε_crit must be non-negative")
    jobs = settings.jobs if jobs is None else jobs
    logger.info("Mean-field sweep over %d drive values (jobs=%d)", ratios.size, jobs)
    chunks = Parallel(n_jobs=jobs)(
        delayed(_rows_at)(p.with_epsilon(r * p.eps_crit)) for r in ratios
    )
    table = pd.DataFrame([row for chunk in chunks for row in chunk], columns=COLUMNS)
    counts = table.groupby("kind")["stability"].value_counts().to_dict()
    logger.info("Sweep finished: %s", counts)
    return table
