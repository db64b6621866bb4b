"""
Sparse operator algebra on the composite space.

Local factor matrices are embedded with Kronecker products (identity on the
other factors). Built operators are memoised in ``src.infra.cache``.
"""
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Dict, Optional, Union
import logging

import numpy as np
import scipy.sparse as sp

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert.space import SpaceDescriptor
from src.infra.cache import get_or_build

logger = logging.getLogger("cavity_sim.hilbert.operators")

HERMITIAN_TOL = 1e-12


class OperatorKind(str, Enum):
    ANNIHILATE = "annihilate"
    CREATE = "create"
    NUMBER = "number"
    SIGMA_PLUS = "sigma_plus"
    SIGMA_MINUS = "sigma_minus"
    SIGMA3 = "sigma3"
    SHIFT_PLUS = "shift_plus"
    SHIFT_MINUS = "shift_minus"
    KINETIC = "kinetic"
    J_PLUS = "J_plus"
    J_MINUS = "J_minus"
    J3 = "J3"
    J1 = "J1"
    PARITY = "parity"
    PARITY_RESTRICTED = "parity_restricted"


_LADDER_ONLY = {OperatorKind.SHIFT_PLUS, OperatorKind.SHIFT_MINUS, OperatorKind.PARITY}
_RESTRICTED_ONLY = {
    OperatorKind.J_PLUS, OperatorKind.J_MINUS, OperatorKind.J3,
    OperatorKind.J1, OperatorKind.PARITY_RESTRICTED,
}
_AXIS_KINDS = _LADDER_ONLY
_HERMITIAN_KINDS = {
    OperatorKind.NUMBER, OperatorKind.SIGMA3, OperatorKind.KINETIC, OperatorKind.J3,
    OperatorKind.J1, OperatorKind.PARITY, OperatorKind.PARITY_RESTRICTED,
}


@dataclass(frozen=True, eq=False)
class Operator:
    """Complex sparse matrix bound to a space descriptor."""

    matrix: sp.csr_matrix
    space: SpaceDescriptor
    hermitian: bool = False

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        dim = self.space.dim
        if matrix.shape != (dim, dim):
            raise SpaceError(f"operator shape {matrix.shape} does not match space dimension {dim}")
        if self.hermitian:
            deviation = _max_abs(matrix - matrix.conj().T)
            if deviation >= HERMITIAN_TOL:
                raise SpaceError(f"operator flagged hermitian but ‖A − A†‖_max = {deviation:.3e}")

    # algebra
    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T.tocsr(), self.space, self.hermitian)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix + other.matrix, self.space, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix - other.matrix, self.space, self.hermitian and other.hermitian)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.space, self.hermitian)

    def __mul__(self, scalar: complex) -> "Operator":
        if isinstance(scalar, Operator):
            raise TypeError("use @ for operator products")
        keeps = self.hermitian and np.isreal(scalar)
        return Operator(self.matrix * scalar, self.space, bool(keeps))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix @ other.matrix, self.space, False)
        return self.matrix @ other

    def commutator(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix @ other.matrix - other.matrix @ self.matrix, self.space)

    def norm_max(self) -> float:
        return _max_abs(self.matrix)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def _check(self, other: "Operator") -> None:
        if other.space != self.space:
            raise SpaceError("operators live on different spaces")


def _max_abs(matrix: sp.spmatrix) -> float:
    matrix = sp.csr_matrix(matrix)
    return float(np.max(np.abs(matrix.data))) if matrix.nnz else 0.0


# ---------------------------------------------------------------------------
# local factor matrices
# ---------------------------------------------------------------------------

def _annihilation(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1,
                    shape=(n_max + 1, n_max + 1), format="csr")


def _two_level(kind: str) -> sp.csr_matrix:
    # basis (lower, upper): |g⟩,|e⟩ or |0⟩,|k⟩
    if kind == "raise":
        return sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    if kind == "lower":
        return sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    return sp.csr_matrix(np.diag([-1.0, 1.0]))


def embed(local: sp.spmatrix, factor: int, space: SpaceDescriptor) -> sp.csr_matrix:
    """Embed a single-factor matrix into the composite space."""
    dims = space.factor_dims
    if local.shape != (dims[factor], dims[factor]):
        raise SpaceError(f"local matrix {local.shape} does not fit factor {space.factor_names[factor]}")
    mats = [sp.identity(d, format="csr") for d in dims]
    mats[factor] = sp.csr_matrix(local)
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), mats)


def _check_kind(kind: OperatorKind, space: SpaceDescriptor, axis: Optional[int]) -> None:
    if kind in _LADDER_ONLY and not space.is_ladder:
        raise SpaceError(f"operator '{kind.value}' requires ladder motion")
    if kind in _RESTRICTED_ONLY and space.is_ladder:
        raise SpaceError(f"operator '{kind.value}' requires restricted motion")
    if kind in _AXIS_KINDS:
        if axis is None or not 0 <= axis < space.motion.dims:
            raise SpaceError(
                f"axis {axis} out of range for '{kind.value}' on {space.motion.dims}-dim ladder"
            )


def _build(kind: OperatorKind, space: SpaceDescriptor, axis: Optional[int],
           omega_r: Optional[float]) -> Operator:
    photon, atom, motion0 = 0, 1, 2
    hermitian = kind in _HERMITIAN_KINDS

    if kind == OperatorKind.ANNIHILATE:
        matrix = embed(_annihilation(space.photon_cutoff), photon, space)
    elif kind == OperatorKind.CREATE:
        matrix = embed(_annihilation(space.photon_cutoff).T, photon, space)
    elif kind == OperatorKind.NUMBER:
        matrix = embed(sp.diags(np.arange(space.photon_cutoff + 1, dtype=float)), photon, space)
    elif kind == OperatorKind.SIGMA_PLUS:
        matrix = embed(_two_level("raise"), atom, space)
    elif kind == OperatorKind.SIGMA_MINUS:
        matrix = embed(_two_level("lower"), atom, space)
    elif kind == OperatorKind.SIGMA3:
        matrix = embed(_two_level("z"), atom, space)
    elif kind in (OperatorKind.SHIFT_PLUS, OperatorKind.SHIFT_MINUS):
        size = space.motion.shape[axis]
        offset = -1 if kind == OperatorKind.SHIFT_PLUS else 1
        hop = sp.diags(np.ones(size - 1), offset, shape=(size, size), format="csr")
        matrix = embed(hop, motion0 + axis, space)
    elif kind == OperatorKind.KINETIC:
        if omega_r is None:
            raise SpaceError("kinetic operator requires omega_r")
        if space.is_ladder:
            matrix = sp.csr_matrix((space.dim, space.dim), dtype=complex)
            for m in range(space.motion.dims):
                l = space.motion.momenta(m).astype(float)
                matrix = matrix + embed(sp.diags(omega_r * l ** 2), motion0 + m, space)
        else:
            matrix = embed(0.5 * omega_r * _two_level("z"), motion0, space)
    elif kind == OperatorKind.J_PLUS:
        matrix = embed(_two_level("raise"), motion0, space)
    elif kind == OperatorKind.J_MINUS:
        matrix = embed(_two_level("lower"), motion0, space)
    elif kind == OperatorKind.J3:
        matrix = embed(_two_level("z"), motion0, space)
    elif kind == OperatorKind.J1:
        matrix = embed(_two_level("raise") + _two_level("lower"), motion0, space)
    elif kind == OperatorKind.PARITY:
        matrix = sp.diags(parity_labels(space)[f"parity{axis}"].astype(float), format="csr")
    elif kind == OperatorKind.PARITY_RESTRICTED:
        matrix = sp.diags(parity_labels(space)["parity_restricted"].astype(float), format="csr")
    else:  # pragma: no cover - enum is exhaustive
        raise SpaceError(f"unknown operator kind {kind}")

    return Operator(matrix, space, hermitian)


def build_operator(
    kind: Union[OperatorKind, str],
    space: SpaceDescriptor,
    axis: Optional[int] = None,
    omega_r: Optional[float] = None,
) -> Operator:
    """
    Build an operator embedded in the full composite space.

    Args:
        kind: operator kind (enum member or its string value)
        space: target space
        axis: ladder axis for shift/parity operators
        omega_r: recoil frequency for the kinetic operator

    Returns:
        The embedded Operator (memoised per space).
    """
    try:
        kind = OperatorKind(kind)
    except ValueError:
        raise SpaceError(f"unknown operator kind '{kind}'") from None
    _check_kind(kind, space, axis)
    if kind not in _AXIS_KINDS:
        axis = None
    key = (kind.value, space, axis, None if omega_r is None else float(omega_r))
    return get_or_build(key, lambda: _build(kind, space, axis, omega_r))


def parity_labels(space: SpaceDescriptor) -> Dict[str, np.ndarray]:
    """
    Diagonals of the conserved parity operators.

    Ladder spaces get one entry per axis, ``parity{m}`` = (−1)^{l_m} σ3;
    restricted spaces get ``parity_restricted`` = σ3 J3.
    """
    labels = space.grids()
    sigma3 = np.where(labels[1] == 1, 1, -1)
    if space.is_ladder:
        return {
            f"parity{m}": np.where(labels[2 + m] % 2 == 0, 1, -1) * sigma3
            for m in range(space.motion.dims)
        }
    return {"parity_restricted": sigma3 * labels[2]}
