"""
Lowest eigenstates of the closed Hamiltonian, one parity sector at a time.

Each sector is solved separately so returned eigenvectors are parity
definite; degenerate partners from different sectors are all reported.
"""
from dataclasses import dataclass, field
from typing import Dict, List
import logging

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from src.app.core.config import settings
from src.cavity_sim.closed.model import ManifoldSpec
from src.cavity_sim.errors import EigenSolverError, SpaceError
from src.cavity_sim.hilbert.operators import Operator, parity_labels
from src.cavity_sim.hilbert.states import StateVector

logger = logging.getLogger("cavity_sim.closed.eigen")

DENSE_LIMIT = 1500
RESIDUAL_TOL = 1e-8


@dataclass
class EigenLevel:
    energy: float
    parity: Dict[str, int]
    state: StateVector
    residual: float


@dataclass
class MaskedGroundState:
    energy: float
    levels: List[EigenLevel] = field(default_factory=list)

    @property
    def state(self) -> StateVector:
        return self.levels[0].state

    @property
    def degeneracy(self) -> int:
        return len(self.levels)


def _solve_sector(block, k: int):
    size = block.shape[0]
    k = min(k, size)
    if size <= DENSE_LIMIT or k >= size - 1:
        return la.eigh(block.toarray(), subset_by_index=[0, k - 1])
    try:
        return eigsh(block, k=k, which="SA", tol=1e-12, ncv=max(4 * k + 1, 40), maxiter=20 * size)
    except ArpackNoConvergence as exc:
        raise EigenSolverError(f"Lanczos did not converge on a {size}-dim sector") from exc


def masked_ground_state(
    H: Operator,
    manifold: ManifoldSpec,
    omega: float = 1.0,
    per_sector: int = 2,
) -> MaskedGroundState:
    """
    Lowest eigenpairs of H inside the manifold, per parity sector.

    Args:
        H: closed-system Hamiltonian (ladder space)
        manifold: excitation manifold to diagonalize
        omega: coupling scale Ω for the degeneracy window
        per_sector: eigenpairs requested per sector

    Returns:
        MaskedGroundState listing every level within degeneracy_tol·Ω of the minimum.

    Raises:
        ValueError: when H carries no recoil term (ω_r = 0).
    """
    space = H.space
    if not space.is_ladder:
        raise SpaceError("masked ground states are computed on ladder spaces")
    if not H.hermitian:
        raise ValueError("masked_ground_state needs a hermitian Hamiltonian")
    idx = manifold.indices(space)
    # kinetic ω_r l² is the only diagonal term inside the manifold
    if not np.any(np.abs(H.matrix.diagonal()[idx]) > 0):
        raise ValueError("masked ground state needs ω_r > 0 (the doublet is not resolved without recoil)")
    labels = parity_labels(space)
    names = sorted(labels)
    sector_keys = np.stack([labels[name][idx] for name in names], axis=1)

    candidates: List[EigenLevel] = []
    for key in np.unique(sector_keys, axis=0):
        members = idx[np.all(sector_keys == key, axis=1)]
        block = H.matrix[members][:, members].tocsr()
        values, vectors = _solve_sector(block, per_sector)
        for j in range(values.size):
            vec = vectors[:, j]
            residual = float(np.linalg.norm(block @ vec - values[j] * vec))
            if residual > RESIDUAL_TOL * max(1.0, abs(omega)):
                raise EigenSolverError("eigenpair residual above threshold", residual)
            full = np.zeros(space.dim, dtype=complex)
            full[members] = vec
            candidates.append(EigenLevel(
                energy=float(values[j]),
                parity={name: int(v) for name, v in zip(names, key)},
                state=StateVector(full, space).normalize(),
                residual=residual,
            ))
        logger.debug("Sector %s (%d states): lowest %.10f", dict(zip(names, key)), members.size, values[0])

    candidates.sort(key=lambda level: level.energy)
    e_min = candidates[0].energy
    window = settings.degeneracy_tol * abs(omega)
    levels = [level for level in candidates if level.energy - e_min <= window]
    logger.info("Ground energy %.10f with %d level(s) inside %.1e", e_min, len(levels), window)
    return MaskedGroundState(energy=e_min, levels=levels)
