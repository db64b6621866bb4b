"""
Pure and mixed states on the composite space, plus the generic state
utilities (expectation values, partial traces, ladder leakage monitor).
"""
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from src.app.core.config import settings
from src.cavity_sim.errors import LeakageError, SpaceError
from src.cavity_sim.hilbert.operators import Operator
from src.cavity_sim.hilbert.space import E, G, SpaceDescriptor

logger = logging.getLogger("cavity_sim.hilbert.states")

NORM_TOL = 1e-10
TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8


@dataclass
class StateVector:
    amplitudes: np.ndarray
    space: SpaceDescriptor

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != self.space.dim:
            raise SpaceError(
                f"state has {self.amplitudes.size} amplitudes, space dimension is {self.space.dim}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        norm = self.norm
        if norm == 0.0:
            raise SpaceError("cannot normalize the zero vector")
        self.amplitudes = self.amplitudes / norm
        return self

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.space)

    def inner(self, other: "StateVector") -> complex:
        """⟨self|other⟩"""
        if other.space != self.space:
            raise SpaceError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.space.factor_dims)

    def with_photon_cutoff(self, n_max: int) -> "StateVector":
        """
        Re-express the state on a space with a different Fock cutoff.

        Growing pads with zeros; shrinking is only allowed when the dropped
        levels carry no amplitude.
        """
        old = self.tensor()
        target = self.space.with_photon_cutoff(n_max)
        new = np.zeros(target.factor_dims, dtype=complex)
        keep = min(n_max, self.space.photon_cutoff) + 1
        if np.any(np.abs(old[keep:]) > 0):
            raise SpaceError(f"state has amplitude above Fock level {n_max}")
        new[:keep] = old[:keep]
        return StateVector(new.ravel(), target)


@dataclass
class DensityMatrix:
    matrix: np.ndarray
    space: SpaceDescriptor

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.space.dim
        if self.matrix.shape != (dim, dim):
            raise SpaceError(f"density matrix shape {self.matrix.shape} does not match dimension {dim}")

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.space)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def symmetrize(self) -> "DensityMatrix":
        self.matrix = 0.5 * (self.matrix + self.matrix.conj().T)
        return self

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def check(self, positivity: bool = False, positivity_tol: float = POSITIVITY_TOL) -> None:
        """Validate trace, hermiticity and (optionally) positivity."""
        if abs(self.trace - 1.0) > TRACE_TOL:
            raise SpaceError(f"trace {self.trace.real:.12f} deviates from 1")
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if herm > HERMITICITY_TOL:
            raise SpaceError(f"density matrix not hermitian (max deviation {herm:.3e})")
        if positivity:
            lam = self.min_eigenvalue()
            if lam < -positivity_tol:
                raise SpaceError(f"density matrix has negative eigenvalue {lam:.3e}")

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.copy(), self.space)


State = Union[StateVector, DensityMatrix]


def basis_state(
    space: SpaceDescriptor,
    photons: int = 0,
    atom: str = "g",
    momentum: Optional[Union[int, Sequence[int]]] = None,
) -> StateVector:
    """
    Product basis state |atom, photons, momentum⟩.

    Args:
        space: target space
        photons: Fock number
        atom: "g" or "e"
        momentum: l per ladder axis (int for 1D), or J3 = ±1 on restricted motion;
            defaults to l = 0, or |0⟩ (J3 = −1) on restricted motion

    Returns:
        Normalized StateVector.
    """
    if not 0 <= photons <= space.photon_cutoff:
        raise SpaceError(f"photon number {photons} outside 0..{space.photon_cutoff}")
    if atom not in ("g", "e"):
        raise SpaceError(f"atom label must be 'g' or 'e', got {atom!r}")
    index = [photons, E if atom == "e" else G]
    if space.is_ladder:
        ls = list(np.atleast_1d(0 if momentum is None else momentum))
        if len(ls) == 1 and space.motion.dims > 1:
            ls = ls * space.motion.dims
        if len(ls) != space.motion.dims:
            raise SpaceError(f"expected {space.motion.dims} momenta, got {ls}")
        for m, l in enumerate(ls):
            if abs(l) > space.motion.l_max[m]:
                raise SpaceError(f"momentum {l} outside ladder ±{space.motion.l_max[m]}")
            index.append(int(l) + space.motion.l_max[m])
    else:
        momentum = -1 if momentum is None else momentum
        if momentum not in (-1, 1):
            raise SpaceError(f"restricted motion takes J3 = ±1, got {momentum}")
        index.append(0 if momentum == -1 else 1)
    amps = np.zeros(space.factor_dims, dtype=complex)
    amps[tuple(index)] = 1.0
    return StateVector(amps.ravel(), space)


def expectation(op: Operator, state: State) -> Union[complex, float]:
    """
    ⟨ψ|A|ψ⟩ or Tr(Aρ); real when the operator is flagged hermitian and the
    imaginary part is below 1e-8.
    """
    if op.space != state.space:
        raise SpaceError("operator and state dimensions do not match")
    if isinstance(state, StateVector):
        value = complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    else:
        value = complex(np.trace(op.matrix @ state.matrix))
    if op.hermitian and abs(value.imag) < 1e-8:
        return float(value.real)
    return value


@dataclass
class ReducedDensityMatrix:
    """Density matrix on a subset of factors (e.g. the Fock-basis field state)."""

    matrix: np.ndarray
    factors: Tuple[str, ...]
    dims: Tuple[int, ...]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> ReducedDensityMatrix:
    """
    Reduced density matrix on the kept factors (in tensor order).

    For keep={"photon"} this is the field state consumed by the Wigner module.
    """
    space = rho.space
    keep_idx = sorted({space.factor_index(name) for name in keep})
    if not keep_idx:
        raise SpaceError("keep must name at least one factor")
    dims = list(space.factor_dims)
    n = len(dims)
    tensor = rho.matrix.reshape(dims + dims)
    # trace out from the highest axis down so lower indices stay valid
    current = n
    for axis in sorted(set(range(n)) - set(keep_idx), reverse=True):
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
        current -= 1
    kept_dims = tuple(dims[i] for i in keep_idx)
    d = int(np.prod(kept_dims))
    return ReducedDensityMatrix(
        tensor.reshape(d, d),
        tuple(space.factor_names[i] for i in keep_idx),
        kept_dims,
    )


def edge_population(psi: StateVector, margin: int = 1) -> float:
    """Population on |l| ≥ l_max − margin along any ladder axis."""
    space = psi.space
    if not space.is_ladder:
        return 0.0
    prob = np.abs(psi.tensor()) ** 2
    mask = np.zeros(prob.shape, dtype=bool)
    for m, l_max in enumerate(space.motion.l_max):
        l = space.motion.momenta(m)
        edge = np.abs(l) >= l_max - margin
        shape = [1] * prob.ndim
        shape[2 + m] = l.size
        mask |= edge.reshape(shape)
    return float(prob[mask].sum())


def check_leakage(psi: StateVector, tol: Optional[float] = None) -> float:
    """Raise LeakageError when the ladder edges are populated above tol."""
    tol = settings.leakage_tol if tol is None else tol
    population = edge_population(psi)
    if population > tol:
        raise LeakageError(population, tol, psi.space.motion.l_max)
    return population


def factor_split(space: SpaceDescriptor, part: Iterable[str]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Axis indices (part, complement) of a factor bipartition."""
    first = tuple(sorted({space.factor_index(name) for name in part}))
    rest = tuple(i for i in range(len(space.factor_dims)) if i not in first)
    if not first or not rest:
        raise SpaceError("bipartition must leave factors on both sides")
    return first, rest
