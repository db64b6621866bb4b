"""
Steady-state branches of the mean-field equations.

Trivial branch: X = Y = 0, β = 0, α = −iε/κ, with ζ = ±1 representatives.

Nontrivial branch: ζ = 0, β = e^{iφ}. Setting dα/dt = 0 and dζ/dt = 0 gives
    Re α = (Ω/4κ) X sin φ,   Im α = −(Ω/4κ) X cos φ − ε/κ,   X = −(4ε/Ω) cos φ
and dY/dt = 0 with Y = 0 fixes Z = 4ω_rκ cos φ / (Ω² sin φ).

Two quadratics in u = cos²φ are solved: the published form, and the one
that follows from X² + Z² = 1 with the expressions above. Every candidate
is filtered by |X|, |Z| ≤ 1 and by the fixed-point residual.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple
import logging

import numpy as np

from src.app.core.config import settings
from src.cavity_sim.mean_field.equations import MeanFieldParams, MeanFieldState, mf_rhs

logger = logging.getLogger("cavity_sim.mean_field.steady")

PHYSICAL_SLACK = 1e-12


class BranchKind(str, Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"


@dataclass
class SteadyBranch:
    kind: BranchKind
    label: str
    state: MeanFieldState
    residual: float
    cos_phi: float = float("nan")
    root_set: Optional[str] = None
    stability: Optional[str] = None
    leading_eigenvalue: complex = complex("nan")
    warnings: List[str] = field(default_factory=list)


def _quadratic_roots(b: float, c: float) -> List[float]:
    """Real roots of u² − b u + c = 0 without cancellation."""
    disc = b * b - 4.0 * c
    if disc < 0:
        return []
    big = 0.5 * (b + np.copysign(np.sqrt(disc), b))
    if big == 0.0:
        return [0.0]
    return sorted({big, c / big})


def _phases_from_u(roots: List[float]) -> List[float]:
    phases: List[float] = []
    for u in roots:
        if -PHYSICAL_SLACK <= u <= 1.0 + PHYSICAL_SLACK:
            r = float(np.sqrt(np.clip(u, 0.0, 1.0)))
            for c in (r, -r):
                base = float(np.arccos(c))
                for phi in (base, -base):
                    phi = float(np.mod(phi, 2 * np.pi))
                    if phi > 2 * np.pi - 1e-12:
                        phi = 0.0
                    if all(abs(phi - known) > 1e-12 for known in phases):
                        phases.append(phi)
    return sorted(phases)


def transcendental_quartic(p: MeanFieldParams, phi) -> np.ndarray:
    """cos⁴φ − (ω_rκ/2ε² + ε_c²/ε² + 1) cos²φ + ε_c²/ε² as published."""
    u = np.cos(phi) ** 2
    eps2 = p.epsilon ** 2
    b = p.omega_r * p.kappa / (2 * eps2) + p.eps_crit ** 2 / eps2 + 1.0
    return u ** 2 - b * u + p.eps_crit ** 2 / eps2


def transcendental_roots(p: MeanFieldParams) -> List[float]:
    """
    Dipole phases solving the published quartic in cos φ.

    Returns every φ in [0, 2π) with u = cos²φ ∈ [0, 1]; an empty list when no
    physical root exists.
    """
    if not p.epsilon > 0:
        raise ValueError("transcendental roots need ε > 0")
    eps2 = p.epsilon ** 2
    b = p.omega_r * p.kappa / (2 * eps2) + p.eps_crit ** 2 / eps2 + 1.0
    c = p.eps_crit ** 2 / eps2
    return _phases_from_u(_quadratic_roots(b, c))


def localization_roots(p: MeanFieldParams) -> List[float]:
    """
    Dipole phases from X² + Z² = 1 with the steady X and Z expressions:

        u² − [1 + ε_c²/(4ε²) + ω_r²κ²/(4ε²ε_c²)] u + ε_c²/(4ε²) = 0

    For ω_r > 0 exactly one root lies in (0, 1).
    """
    if not p.epsilon > 0:
        raise ValueError("localization roots need ε > 0")
    eps2 = p.epsilon ** 2
    ec2 = p.eps_crit ** 2
    b = 1.0 + ec2 / (4 * eps2) + (p.omega_r * p.kappa) ** 2 / (4 * eps2 * ec2)
    c = ec2 / (4 * eps2)
    return _phases_from_u(_quadratic_roots(b, c))


def residual_norm(state: MeanFieldState, p: MeanFieldParams) -> float:
    return float(np.max(np.abs(mf_rhs(state, p))))


def trivial_branches(p: MeanFieldParams) -> List[SteadyBranch]:
    branches = []
    for sign in (-1, 1):
        state = MeanFieldState(
            alpha=complex(0.0, -p.epsilon / p.kappa), beta=0j,
            zeta=float(sign), X=0.0, Y=0.0, Z=float(sign),
        )
        branches.append(SteadyBranch(
            kind=BranchKind.TRIVIAL,
            label=f"trivial{'+' if sign > 0 else '-'}",
            state=state,
            residual=residual_norm(state, p),
        ))
    return branches


def _nontrivial_candidates(phi: float, p: MeanFieldParams) -> List[Tuple[MeanFieldState, str]]:
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    x = -4.0 * p.epsilon / p.omega * cos_phi
    if abs(x) > 1.0 + PHYSICAL_SLACK:
        return []
    x = float(np.clip(x, -1.0, 1.0))
    alpha = complex(
        p.omega / (4 * p.kappa) * x * sin_phi,
        -p.omega / (4 * p.kappa) * x * cos_phi - p.epsilon / p.kappa,
    )
    z_abs = float(np.sqrt(max(0.0, 1.0 - x * x)))
    out = []
    for z_sign in (1, -1):
        state = MeanFieldState(alpha=alpha, beta=complex(cos_phi, sin_phi), zeta=0.0,
                               X=x, Y=0.0, Z=z_sign * z_abs)
        out.append((state, "+" if z_sign > 0 else "-"))
        if z_abs == 0.0:
            break
    return out


def mf_steady_states(p: MeanFieldParams, residual_tol: Optional[float] = None) -> List[SteadyBranch]:
    """
    Trivial representatives plus every nontrivial candidate that survives the
    physicality and residual filters.
    """
    if p.omega_r == 0:
        raise ValueError("steady-state analysis needs ω_r > 0")
    tol = settings.residual_tol if residual_tol is None else residual_tol
    branches = trivial_branches(p)
    if p.epsilon == 0:
        return branches

    seen = set()
    index = 0
    for root_set, phases in (("published", transcendental_roots(p)), ("localization", localization_roots(p))):
        for phi in phases:
            candidates = _nontrivial_candidates(phi, p)
            if not candidates:
                logger.debug("φ=%.6f (%s) discarded: |X| > 1", phi, root_set)
            for state, z_label in candidates:
                residual = residual_norm(state, p)
                if residual >= tol:
                    logger.info("Discarded %s candidate φ=%.6f Z%s: residual %.2e",
                                root_set, phi, z_label, residual)
                    continue
                key = tuple(np.round(state.to_vector(), 9))
                if key in seen:
                    continue
                seen.add(key)
                branches.append(SteadyBranch(
                    kind=BranchKind.NONTRIVIAL,
                    label=f"nontrivial{index}",
                    state=state,
                    residual=residual,
                    cos_phi=float(np.cos(phi)),
                    root_set=root_set,
                ))
                index += 1
    logger.debug("ε=%.4g: %d branch(es) kept", p.epsilon, len(branches))
    return branches
