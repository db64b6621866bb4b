"""
Dressed basis of the restricted open system:

    |±, n, J1⟩ = (|g, n⟩ ± |e, n−1⟩)/√2 ⊗ (|0⟩ + J1 |k⟩)/√2

(a σ+ + a† σ−)|±, n⟩ = ±√n |±, n⟩. For n = 0 only |g, 0⟩ exists.
"""
import numpy as np

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert import SpaceDescriptor, StateVector, build_operator
from src.cavity_sim.hilbert.space import E, G


def _dressed_amplitudes(branch: int, n: int, space: SpaceDescriptor, j1: int,
                        normalized: bool = True) -> np.ndarray:
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or −1, got {branch}")
    if j1 not in (1, -1):
        raise ValueError(f"J1 eigenvalue must be ±1, got {j1}")
    if space.is_ladder:
        raise SpaceError("dressed states are defined on restricted motion")
    if not 0 <= n <= space.photon_cutoff:
        raise SpaceError(f"n={n} outside 0..{space.photon_cutoff}")
    amps = np.zeros(space.factor_dims, dtype=complex)
    motion = np.array([1.0, j1]) / np.sqrt(2.0)
    if n == 0:
        # formal |±,0⟩ keeps the 1/√2 weight of the |g,0⟩ component
        amps[0, G, :] = motion * (1.0 if normalized else 1.0 / np.sqrt(2.0))
    else:
        amps[n, G, :] = motion / np.sqrt(2.0)
        amps[n - 1, E, :] = branch * motion / np.sqrt(2.0)
    return amps.ravel()


def dressed_state(branch: int, n: int, space: SpaceDescriptor, j1: int = 1) -> StateVector:
    """Normalized |branch, n, J1=j1⟩."""
    return StateVector(_dressed_amplitudes(branch, n, space, j1), space)


def branch_transition_element(n: int, space: SpaceDescriptor = None, j1: int = 1) -> float:
    """
    Σ_{n′} ⟨+, n′, J1| a |−, n, J1⟩, which equals (√n − √(n−1))/2.

    The n′ = 0 term uses the formal |±,0⟩ = |g,0⟩/√2.
    """
    if n < 1:
        raise ValueError(f"branch transition element needs n >= 1, got {n}")
    space = SpaceDescriptor.restricted(n + 1) if space is None else space
    a = build_operator("annihilate", space)
    ket = a.matrix @ _dressed_amplitudes(-1, n, space, j1)
    bra = sum(
        _dressed_amplitudes(1, m, space, j1, normalized=False)
        for m in range(space.photon_cutoff + 1)
    )
    return float(np.real(np.vdot(bra, ket)))
