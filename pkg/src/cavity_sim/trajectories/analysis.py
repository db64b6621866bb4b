"""
Record analysis: toy conditioned states for each current branch, branch
fidelities and the correlation between the current branch and ⟨J1σ−⟩.

The conditioned states are

    ψ±  ∝  Σ_n c_n ( e^{iφ_u} |+, n, J1=±1⟩ + e^{iφ_d} |−, n, J1=∓1⟩ ),   n ≥ 1
"""
from typing import Dict, Optional, Sequence
import logging

import numpy as np

from src.cavity_sim.hilbert import SpaceDescriptor, StateVector
from src.cavity_sim.open_system import dressed_state
from src.cavity_sim.trajectories.runner import HeterodyneRecord
from src.utils.metrics import dominant_frequency, histogram_modes

logger = logging.getLogger("cavity_sim.trajectories.analysis")

__all__ = ["toy_conditioned_state", "branch_fidelity", "branch_correlation", "dominant_frequency"]


def toy_conditioned_state(
    sign: int,
    c_n: Sequence[complex],
    phi_u: float,
    phi_d: float,
    space: SpaceDescriptor,
) -> StateVector:
    """
    Normalized ψ± for the positive (sign=+1) or negative (sign=−1) branch.

    ``c_n[k]`` multiplies the n = k+1 doublet.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or −1, got {sign}")
    c_n = np.asarray(c_n, dtype=complex)
    if c_n.size == 0 or not np.any(c_n):
        raise ValueError("c_n must contain at least one non-zero amplitude")
    if c_n.size > space.photon_cutoff:
        raise ValueError(f"{c_n.size} doublets do not fit below N_max={space.photon_cutoff}")
    up, down = np.exp(1j * phi_u), np.exp(1j * phi_d)
    amps = np.zeros(space.dim, dtype=complex)
    for k, c in enumerate(c_n):
        if c == 0:
            continue
        n = k + 1
        amps += c * (
            up * dressed_state(1, n, space, j1=sign).amplitudes
            + down * dressed_state(-1, n, space, j1=-sign).amplitudes
        )
    return StateVector(amps / np.linalg.norm(amps), space)


def branch_fidelity(
    psi: StateVector,
    c_n: Sequence[complex],
    phi_u: float = 0.0,
    phi_d: float = 0.0,
) -> Dict[str, float]:
    """|⟨ψ±|ψ⟩|² against both toy states."""
    return {
        key: float(abs(np.vdot(toy_conditioned_state(sign, c_n, phi_u, phi_d, psi.space).amplitudes,
                               psi.amplitudes)) ** 2)
        for key, sign in (("+", 1), ("-", -1))
    }


def branch_correlation(record: HeterodyneRecord, threshold: Optional[float] = None) -> float:
    """
    Pearson correlation between the Re I branch label (±1) and Re⟨J1σ−⟩.

    The threshold defaults to the histogram midpoint of Re I, or its median
    when the histogram is unimodal. Returns NaN when either series is flat.
    """
    current = np.real(record.current)
    if threshold is None:
        fit = histogram_modes(current)
        threshold = fit["threshold"] if fit["bimodal"] else float(np.median(current))
    labels = np.where(current > threshold, 1.0, -1.0)
    observable = np.real(record.j1_sigma_minus)
    if np.ptp(labels) == 0 or np.ptp(observable) == 0:
        logger.warning("Branch correlation undefined: a series is constant")
        return float("nan")
    return float(np.corrcoef(labels, observable)[0, 1])
