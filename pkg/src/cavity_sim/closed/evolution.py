"""
Unitary time evolution for the closed system.

Joint evolution compresses H to the manifold block and propagates with
scipy's expm_multiply. The 2D factorized route evolves each dressed branch
on two independent 1D ladders along the rotated coordinates and assembles
full states only on request.
"""
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply, norm as sparse_norm
from tqdm import tqdm

from src.app.core.config import settings
from src.cavity_sim.closed.model import ClosedModelParams, ManifoldSpec
from src.cavity_sim.errors import IntegrationError, LeakageError, ParityDriftError, SpaceError
from src.cavity_sim.hilbert.operators import Operator, parity_labels
from src.cavity_sim.hilbert.space import E, G, SpaceDescriptor
from src.cavity_sim.hilbert.states import StateVector, check_leakage

logger = logging.getLogger("cavity_sim.closed.evolution")

NORM_DRIFT_TOL = 1e-8
ENERGY_DRIFT_TOL = 1e-6
PARITY_DRIFT_TOL = 1e-8


def _uniform(times: np.ndarray) -> bool:
    steps = np.diff(times)
    return steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=1e-14)


def _propagate(block: sp.csr_matrix, v0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Rows are exp(−iH(t_k − t_0)) v0."""
    generator = (-1j * block).tocsc()
    if times.size == 1:
        return v0[None, :]
    if _uniform(times):
        return expm_multiply(
            generator, v0, start=0.0, stop=float(times[-1] - times[0]),
            num=times.size, endpoint=True,
        )
    out = np.empty((times.size, v0.size), dtype=complex)
    out[0] = v0
    for k in range(1, times.size):
        out[k] = expm_multiply(generator * float(times[k] - times[k - 1]), out[k - 1])
    return out


def _parity_values(psi: np.ndarray, labels: Dict[str, np.ndarray]) -> np.ndarray:
    prob = np.abs(psi) ** 2
    return np.array([np.dot(prob, lab) for lab in labels.values()])


def evolve_unitary(
    H: Operator,
    psi0: StateVector,
    times,
    manifold: Optional[ManifoldSpec] = None,
    check_leak: bool = True,
) -> List[StateVector]:
    """
    Propagate psi0 under H and record the state at each requested time.

    Args:
        H: hermitian Hamiltonian
        psi0: normalized initial state on H's space
        times: increasing time grid; times[0] is the time of psi0
        manifold: restrict propagation to this manifold block (psi0 must live in it)
        check_leak: run the ladder leakage monitor at each recorded step

    Returns:
        One StateVector per grid time.
    """
    if not H.hermitian:
        raise ValueError("evolve_unitary needs a hermitian Hamiltonian")
    if H.space != psi0.space:
        raise SpaceError("Hamiltonian and initial state live on different spaces")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-empty increasing 1D grid")
    if abs(psi0.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state is not normalized (norm={psi0.norm:.12f})")

    space = psi0.space
    if manifold is not None:
        idx = manifold.indices(space)
        outside = np.delete(psi0.amplitudes, idx)
        if outside.size and np.max(np.abs(outside)) > 0:
            raise SpaceError(f"initial state has weight outside manifold n={manifold.n_excitations}")
    else:
        idx = np.arange(space.dim)

    block = H.matrix[idx][:, idx].tocsr()
    v0 = psi0.amplitudes[idx]
    e0 = float(np.vdot(v0, block @ v0).real)
    energy_scale = max(1.0, float(sparse_norm(block, 1)))
    labels = parity_labels(space) if space.is_ladder else {}
    labels = {k: v[idx] for k, v in labels.items()}
    p0 = _parity_values(v0, labels)

    logger.info("Evolving %d-dim block over %d grid points", idx.size, times.size)
    rows = _propagate(block, v0, times)

    states = []
    for k, row in enumerate(tqdm(rows, desc="record", disable=not settings.show_progress)):
        if not np.all(np.isfinite(row)):
            raise IntegrationError(f"non-finite amplitudes at t={times[k]:.4g}")
        norm = np.linalg.norm(row)
        if abs(norm - 1.0) > NORM_DRIFT_TOL:
            raise IntegrationError(f"norm drift {abs(norm - 1.0):.3e} at t={times[k]:.4g}")
        energy = float(np.vdot(row, block @ row).real)
        if abs(energy - e0) > ENERGY_DRIFT_TOL * energy_scale:
            raise IntegrationError(f"energy drift {abs(energy - e0):.3e} at t={times[k]:.4g}")
        if labels:
            drift = np.max(np.abs(_parity_values(row, labels) - p0))
            if drift > PARITY_DRIFT_TOL:
                raise ParityDriftError(f"parity drifted by {drift:.3e} at t={times[k]:.4g}")

        full = np.zeros(space.dim, dtype=complex)
        full[idx] = row
        state = StateVector(full, space)
        if check_leak:
            check_leakage(state)
        states.append(state)
    return states


# ---------------------------------------------------------------------------
# factorized 2D evolution
# ---------------------------------------------------------------------------

def _branch_ladder(params: ClosedModelParams, n: int, l_rot: int, sign: int):
    """1D rotated-coordinate Hamiltonians (h_s, h_d) for dressed branch sign."""
    m = np.arange(-l_rot, l_rot + 1, dtype=float)
    size = m.size
    plus = sp.diags(np.ones(size - 1), -1, shape=(size, size))
    sine = ((plus - plus.T) / 2j).toarray()
    kinetic = np.diag(2.0 * params.omega_r * m ** 2)
    g = 0.5 * params.omega * np.sqrt(n)
    return kinetic + sign * g * sine, kinetic - sign * g * sine


def _propagate_dense(h: np.ndarray, v0: np.ndarray, times: np.ndarray) -> np.ndarray:
    lam, vecs = la.eigh(h)
    coeff = vecs.conj().T @ v0
    phases = np.exp(-1j * np.outer(times - times[0], lam))
    return (phases * coeff) @ vecs.T


@dataclass(eq=False)
class FactorizedTrajectory(Sequence):
    """
    Lazy sequence of 2D StateVectors built from per-branch 1D factors.

    ``amplitudes[σ]`` holds (u_s, u_d) arrays of shape (len(times), 2L+1),
    with σ = +1 / −1 the dressed branch |±,n⟩ = (|e,n−1⟩ ± |g,n⟩)/√2.
    """

    times: np.ndarray
    space: SpaceDescriptor
    n: int
    l_rot: int
    weights: Dict[int, complex]
    amplitudes: Dict[int, tuple] = field(repr=False)

    def __len__(self) -> int:
        return len(self.times)

    def _atom_parts(self, k: int):
        excited = 0.0
        ground = 0.0
        for sign, c in self.weights.items():
            u_s, u_d = self.amplitudes[sign]
            phi = np.outer(u_s[k], u_d[k])
            excited = excited + c / np.sqrt(2.0) * phi
            ground = ground + sign * c / np.sqrt(2.0) * phi
        return excited, ground

    def rotated_amplitudes(self, k: int, atom: str = "e") -> np.ndarray:
        """External amplitudes on the (m_s, m_d) grid for the given atom state."""
        excited, ground = self._atom_parts(k)
        return excited if atom == "e" else ground

    def excited_probability(self) -> np.ndarray:
        return np.array([np.sum(np.abs(self._atom_parts(k)[0]) ** 2) for k in range(len(self))])

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        if k < 0:
            k += len(self)
        if not 0 <= k < len(self):
            raise IndexError(k)
        excited, ground = self._atom_parts(k)
        L = self.l_rot
        ms, md = np.meshgrid(np.arange(-L, L + 1), np.arange(-L, L + 1), indexing="ij")
        l1 = ms + md + 2 * L
        l2 = ms - md + 2 * L
        amps = np.zeros(self.space.factor_dims, dtype=complex)
        amps[self.n - 1, E, l1, l2] = excited
        amps[self.n, G, l1, l2] = ground
        return StateVector(amps.ravel(), self.space)


def evolve_factorized_2d(
    params: ClosedModelParams,
    manifold: ManifoldSpec,
    times,
    l_max_rotated: Optional[int] = None,
    atom: str = "e",
) -> FactorizedTrajectory:
    """
    2D evolution from |atom, l1=0, l2=0⟩ inside manifold n via rotated coordinates.

    Each dressed branch σ sees h_s = 2ω_r m_s² + σ(Ω√n/2) sin θ and
    h_d = 2ω_r m_d² − σ(Ω√n/2) sin θ on its own 1D ladder.
    """
    if params.dims != 2:
        raise SpaceError("factorized evolution is defined for dims=2")
    n = manifold.n_excitations
    if n < 1:
        raise SpaceError("factorized evolution needs a doublet manifold (n >= 1)")
    if atom not in ("e", "g"):
        raise SpaceError(f"atom label must be 'g' or 'e', got {atom!r}")
    l_rot = settings.l_max_rotated_2d if l_max_rotated is None else int(l_max_rotated)
    times = np.asarray(times, dtype=float)

    # |e,n−1⟩ = (|+⟩ + |−⟩)/√2, |g,n⟩ = (|+⟩ − |−⟩)/√2
    weights = {1: 1 / np.sqrt(2.0), -1: (1 if atom == "e" else -1) / np.sqrt(2.0)}
    start = np.zeros(2 * l_rot + 1, dtype=complex)
    start[l_rot] = 1.0
    amplitudes = {}
    for sign in (1, -1):
        h_s, h_d = _branch_ladder(params, n, l_rot, sign)
        u_s = _propagate_dense(h_s, start, times)
        u_d = _propagate_dense(h_d, start, times)
        for label, u in (("m_s", u_s), ("m_d", u_d)):
            edge = float(np.max(np.sum(np.abs(u[:, [0, 1, -2, -1]]) ** 2, axis=1)))
            if edge > settings.leakage_tol:
                raise LeakageError(edge, settings.leakage_tol, (l_rot,))
        amplitudes[sign] = (u_s, u_d)
        logger.debug("Branch %+d evolved on %d-site rotated ladders", sign, 2 * l_rot + 1)

    space = SpaceDescriptor.ladder(n, (2 * l_rot, 2 * l_rot))
    return FactorizedTrajectory(times, space, n, l_rot, weights, amplitudes)
