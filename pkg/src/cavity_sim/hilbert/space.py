"""
Composite space descriptors.

Tensor ordering is photon ⊗ atom ⊗ motion, motion axes ascending. The atom
basis is |g⟩ (index 0), |e⟩ (index 1). A ladder axis stores momenta
l = -l_max..l_max at index l + l_max; the restricted motion stores |0⟩
(index 0) and the symmetric |k⟩ (index 1).
"""
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from src.cavity_sim.errors import SpaceError

ATOM_LEVELS = 2
G, E = 0, 1


@dataclass(frozen=True)
class LadderMotion:
    l_max: Tuple[int, ...]
    q: float = 0.0

    def __post_init__(self):
        l_max = tuple(int(v) for v in np.atleast_1d(self.l_max))
        object.__setattr__(self, "l_max", l_max)
        if not 1 <= len(l_max) <= 3:
            raise SpaceError(f"ladder motion supports 1..3 dims, got {len(l_max)}")
        if any(v < 1 for v in l_max):
            raise SpaceError(f"l_max must be >= 1 per axis, got {l_max}")
        if self.q != 0.0:
            raise SpaceError("quasimomentum is fixed to q = 0; nonzero q is not supported")

    @property
    def dims(self) -> int:
        return len(self.l_max)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(2 * l + 1 for l in self.l_max)

    def momenta(self, axis: int) -> np.ndarray:
        l = self.l_max[axis]
        return np.arange(-l, l + 1)


@dataclass(frozen=True)
class RestrictedMotion:
    """Two-state momentum space {|0⟩, |k⟩}."""

    @property
    def dims(self) -> int:
        return 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return (2,)


Motion = Union[LadderMotion, RestrictedMotion]


@dataclass(frozen=True)
class SpaceDescriptor:
    photon_cutoff: int
    motion: Motion = field(default_factory=RestrictedMotion)

    def __post_init__(self):
        if int(self.photon_cutoff) != self.photon_cutoff or self.photon_cutoff < 0:
            raise SpaceError(f"photon_cutoff must be a non-negative integer, got {self.photon_cutoff}")
        if not isinstance(self.motion, (LadderMotion, RestrictedMotion)):
            raise SpaceError(f"unknown motion variant: {self.motion!r}")

    @classmethod
    def ladder(cls, photon_cutoff: int, l_max) -> "SpaceDescriptor":
        return cls(photon_cutoff, LadderMotion(tuple(np.atleast_1d(l_max))))

    @classmethod
    def restricted(cls, photon_cutoff: int) -> "SpaceDescriptor":
        return cls(photon_cutoff, RestrictedMotion())

    @property
    def is_ladder(self) -> bool:
        return isinstance(self.motion, LadderMotion)

    @property
    def factor_names(self) -> Tuple[str, ...]:
        if self.is_ladder:
            motion = tuple(f"motion{m}" for m in range(self.motion.dims))
        else:
            motion = ("motion",)
        return ("photon", "atom") + motion

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return (self.photon_cutoff + 1, ATOM_LEVELS) + self.motion.shape

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def factor_index(self, name: str) -> int:
        try:
            return self.factor_names.index(name)
        except ValueError:
            raise SpaceError(f"unknown factor '{name}', expected one of {self.factor_names}") from None

    def with_photon_cutoff(self, n_max: int) -> "SpaceDescriptor":
        return SpaceDescriptor(int(n_max), self.motion)

    def describe(self) -> dict:
        """JSON-friendly header (checkpoints, manifests)."""
        if self.is_ladder:
            motion = {"kind": "ladder", "l_max": list(self.motion.l_max), "q": 0.0}
        else:
            motion = {"kind": "restricted"}
        return {"photon_cutoff": self.photon_cutoff, "atom_levels": ATOM_LEVELS, "motion": motion}

    @classmethod
    def from_description(cls, data: dict) -> "SpaceDescriptor":
        motion = data["motion"]
        if motion["kind"] == "ladder":
            return cls.ladder(data["photon_cutoff"], motion["l_max"])
        if motion["kind"] == "restricted":
            return cls.restricted(data["photon_cutoff"])
        raise SpaceError(f"unknown motion kind in header: {motion['kind']}")

    def grids(self) -> Tuple[np.ndarray, ...]:
        """
        Per-factor label arrays broadcast over the full basis (flattened).

        Returns (photons, atom, motion_0, ...) where ladder motion labels are
        the momenta l and restricted motion labels are J3 = ∓1.
        """
        axes = [np.arange(self.photon_cutoff + 1), np.arange(ATOM_LEVELS)]
        if self.is_ladder:
            axes += [self.motion.momenta(m) for m in range(self.motion.dims)]
        else:
            axes.append(np.array([-1, 1]))
        mesh = np.meshgrid(*axes, indexing="ij")
        return tuple(m.ravel() for m in mesh)
