"""
Observables of closed-system states: Rabi signal, momentum distributions,
branch-conditioned wavepackets, position densities and Schmidt entropies.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union
import logging

import numpy as np

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert.space import E, G
from src.cavity_sim.hilbert.states import StateVector, factor_split

logger = logging.getLogger("cavity_sim.closed.observables")


def rabi_signal(states: Sequence[StateVector]) -> np.ndarray:
    """Excited-state probability P_e for each state."""
    # factorized trajectories know P_e without assembling states
    if hasattr(states, "excited_probability"):
        return np.clip(states.excited_probability(), 0.0, 1.0)
    values = []
    for psi in states:
        tensor = psi.tensor()
        values.append(float(np.sum(np.abs(tensor[:, E]) ** 2)))
    return np.clip(np.array(values), 0.0, 1.0)


@dataclass
class MomentumDistribution:
    """
    |c_l|² conditioned on the atomic state.

    ``joint`` is indexed by l + l_max per axis. For 2D states the rotated
    view is indexed by s = l1 + l2 and d = l1 − l2, both in [−2L, 2L].
    """

    momenta: List[np.ndarray]
    joint: np.ndarray
    marginals: List[np.ndarray]
    condition: str
    rotated_momenta: Optional[np.ndarray] = None
    rotated_joint: Optional[np.ndarray] = None
    rotated_marginals: Optional[List[np.ndarray]] = None

    @property
    def total(self) -> float:
        return float(self.joint.sum())


def _rotate(joint: np.ndarray, l_max: int):
    size = 4 * l_max + 1
    rotated = np.zeros((size, size))
    l = np.arange(-l_max, l_max + 1)
    l1, l2 = np.meshgrid(l, l, indexing="ij")
    rotated[l1 + l2 + 2 * l_max, l1 - l2 + 2 * l_max] = joint
    return np.arange(-2 * l_max, 2 * l_max + 1), rotated


def momentum_distribution(psi: StateVector, condition: str = "e") -> MomentumDistribution:
    """
    Momentum distribution of the motion conditioned on |e⟩ or |g⟩.

    The photon factor is summed over, so the total equals P_e (or P_g).
    """
    space = psi.space
    if not space.is_ladder:
        raise SpaceError("momentum distributions need ladder motion")
    if condition not in ("e", "g"):
        raise ValueError(f"condition must be 'e' or 'g', got {condition!r}")
    atom = E if condition == "e" else G
    joint = np.sum(np.abs(psi.tensor()[:, atom]) ** 2, axis=0)
    dims = space.motion.dims
    marginals = [
        joint.sum(axis=tuple(a for a in range(dims) if a != m)) if dims > 1 else joint
        for m in range(dims)
    ]
    dist = MomentumDistribution(
        momenta=[space.motion.momenta(m) for m in range(dims)],
        joint=joint,
        marginals=marginals,
        condition=condition,
    )
    if dims == 2:
        if space.motion.l_max[0] != space.motion.l_max[1]:
            raise SpaceError("rotated view needs equal l_max on both axes")
        dist.rotated_momenta, dist.rotated_joint = _rotate(joint, space.motion.l_max[0])
        dist.rotated_marginals = [dist.rotated_joint.sum(axis=1), dist.rotated_joint.sum(axis=0)]
    return dist


def conditioned_external(psi: StateVector, branch: int, n: int) -> np.ndarray:
    """
    External amplitude ⟨±,n|ψ⟩ with |±,n⟩ = (|e,n−1⟩ ± |g,n⟩)/√2.

    Returns an array over the motion axes (unnormalized).
    """
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    if not 1 <= n <= psi.space.photon_cutoff:
        raise SpaceError(f"dressed level n={n} outside 1..{psi.space.photon_cutoff}")
    tensor = psi.tensor()
    return (tensor[n - 1, E] + branch * tensor[n, G]) / np.sqrt(2.0)


def position_density(psi_external: np.ndarray, grid) -> np.ndarray:
    """
    |ψ(x)|² from ladder amplitudes, ψ(x) = Σ_l c_l e^{ilx} / (2π)^{dims/2}.

    ``psi_external`` has one axis per dimension of length 2l_max+1; ``grid``
    is the set of kx values (shared by all axes). The density integrates to
    one over the cell [0, 2π)^dims.
    """
    coeffs = np.asarray(psi_external, dtype=complex)
    weight = float(np.sum(np.abs(coeffs) ** 2))
    if weight == 0.0:
        raise ValueError("external amplitude is identically zero")
    x = np.asarray(grid, dtype=float)
    field = coeffs
    for axis, size in enumerate(coeffs.shape):
        l_max = (size - 1) // 2
        basis = np.exp(1j * np.outer(np.arange(-l_max, l_max + 1), x))
        field = np.moveaxis(np.tensordot(field, basis, axes=([axis], [0])), -1, axis)
    return np.abs(field) ** 2 / ((2 * np.pi) ** coeffs.ndim * weight)


def schmidt_entropy(psi: Union[StateVector, np.ndarray], split: Optional[Iterable[str]] = None) -> float:
    """
    Entanglement entropy (nats) across a bipartition.

    A StateVector is split into the named factors and the rest; a 2D array
    of external amplitudes is split into its row and column axes.
    """
    if isinstance(psi, StateVector):
        if split is None:
            raise ValueError("a factor split is required for StateVector input")
        first, rest = factor_split(psi.space, split)
        tensor = np.transpose(psi.tensor(), first + rest)
        dims = psi.space.factor_dims
        matrix = tensor.reshape(int(np.prod([dims[i] for i in first])), -1)
    else:
        matrix = np.asarray(psi, dtype=complex)
        if matrix.ndim != 2:
            raise ValueError("array input must be a 2D amplitude grid")
    singular = np.linalg.svd(matrix, compute_uv=False)
    p = singular ** 2
    total = p.sum()
    if total == 0.0:
        raise ValueError("state is identically zero")
    p = p[p > 1e-16 * total] / total
    return float(-np.sum(p * np.log(p)))
