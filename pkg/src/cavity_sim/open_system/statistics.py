"""
Photon-blockade diagnostics and parity-sector bookkeeping.
"""
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert import DensityMatrix, StateVector, partial_trace, parity_labels


@dataclass
class PhotonStatistics:
    mean_n: float
    g2: float
    mandel_q: float
    mean_a: complex
    distribution: np.ndarray


def photon_statistics(rho: DensityMatrix) -> PhotonStatistics:
    """⟨n⟩, g²(0) = ⟨a†²a²⟩/⟨n⟩², Mandel Q and the number distribution."""
    field_rho = partial_trace(rho, ["photon"]).matrix
    p_n = np.clip(np.real(np.diag(field_rho)), 0.0, None)
    n = np.arange(p_n.size, dtype=float)
    mean_n = float(p_n @ n)
    factorial2 = float(p_n @ (n * (n - 1)))
    g2 = factorial2 / mean_n ** 2 if mean_n > 0 else float("nan")
    q = (factorial2 - mean_n ** 2) / mean_n if mean_n > 0 else float("nan")
    mean_a = complex(np.sum(np.sqrt(n[1:]) * np.diag(field_rho, -1)))
    return PhotonStatistics(mean_n=mean_n, g2=g2, mandel_q=q, mean_a=mean_a, distribution=p_n)


def sector_populations(state: Union[DensityMatrix, StateVector]) -> Dict[str, float]:
    """Weights of the σ3J3 = +1 and −1 blocks."""
    if state.space.is_ladder:
        raise SpaceError("sector populations are defined on restricted motion")
    labels = parity_labels(state.space)["parity_restricted"]
    if isinstance(state, StateVector):
        prob = np.abs(state.amplitudes) ** 2
    else:
        prob = np.real(np.diag(state.matrix))
    return {"+1": float(prob[labels == 1].sum()), "-1": float(prob[labels == -1].sum())}
