"""
Linear stability of mean-field fixed points.

Neutral modes (|Re λ| below a relative tolerance) are excluded only when
they have a known origin:
    conserved   zero modes whose left eigenvectors lie along the gradients
                of |β|² + ζ² and X² + Y² + Z²
    motional    the undamped ±iω_r pair of the free motional oscillation
    decoupled   zero modes in the atomic block when X = 0 (the atom does
                not see the field, so its transverse state is undetermined)
Any other neutral mode leaves the point marginal unless a mode is unstable.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List
import logging

import numpy as np
import scipy.linalg as la

from src.cavity_sim.mean_field.equations import (
    BI, BR, MeanFieldParams, STATE_SIZE, X, Y, Z, ZETA,
    finite_difference_jacobian, mf_jacobian,
)
from src.cavity_sim.mean_field.steady import SteadyBranch

logger = logging.getLogger("cavity_sim.mean_field.stability")

NEUTRAL_TOL = 1e-6
JACOBIAN_TOL = 1e-6
CONDITION_LIMIT = 1e8
CONSERVED_OVERLAP = 0.5
ATOMIC_WEIGHT = 0.5


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass
class StabilityReport:
    classification: Stability
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    neutral: np.ndarray
    neutral_roles: List[str]
    leading: complex
    jacobian_mismatch: float
    conserved_overlap: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def role_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for role in self.neutral_roles:
            counts[role] = counts.get(role, 0) + 1
        return counts


def _conserved_gradients(v: np.ndarray) -> np.ndarray:
    """Unit gradients of the two conserved quantities (zero rows are dropped)."""
    g_atom = np.zeros(STATE_SIZE)
    g_atom[[BR, BI, ZETA]] = 2.0 * v[[BR, BI, ZETA]]
    g_motion = np.zeros(STATE_SIZE)
    g_motion[[X, Y, Z]] = 2.0 * v[[X, Y, Z]]
    grads = np.stack([g_atom, g_motion])
    norms = np.linalg.norm(grads, axis=1)
    keep = norms > 0
    return grads[keep] / norms[keep, None]


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _neutral_roles(eigvals: np.ndarray, left: np.ndarray, right: np.ndarray, v: np.ndarray,
                   p: MeanFieldParams, neutral_idx: np.ndarray, tol: float):
    """
    Assign each neutral mode a role and return (roles, overlaps).

    Overlap is the norm of the projection of the unit left eigenvector onto
    the span of the conserved-quantity gradients. As many zero modes as there
    are left-null gradients are marked conserved, largest overlap first.
    """
    grads = _conserved_gradients(v)
    jac = mf_jacobian(v, p)
    overlaps = np.array([float(np.linalg.norm(grads @ _unit(left[:, j]))) for j in neutral_idx])
    roles = ["unexplained"] * len(neutral_idx)

    zero = np.abs(eigvals[neutral_idx]) < tol
    n_conserved = int(sum(np.max(np.abs(g @ jac)) < tol for g in grads))
    for k in np.argsort(-overlaps):
        if n_conserved == 0:
            break
        if zero[k] and overlaps[k] > CONSERVED_OVERLAP:
            roles[k] = "conserved"
            n_conserved -= 1

    if p.omega_r > tol:
        for target in (1j * p.omega_r, -1j * p.omega_r):
            free = [k for k, role in enumerate(roles) if role == "unexplained"]
            if not free:
                break
            dist = np.abs(eigvals[neutral_idx[free]] - target)
            best = int(np.argmin(dist))
            if dist[best] < tol:
                roles[free[best]] = "motional"

    if abs(v[X]) < tol:
        for k, j in enumerate(neutral_idx):
            if roles[k] != "unexplained" or not zero[k]:
                continue
            r_vec = _unit(right[:, j])
            if np.linalg.norm(r_vec[[BR, BI, ZETA]]) > ATOMIC_WEIGHT:
                roles[k] = "decoupled"
    return roles, overlaps.tolist()


def mf_stability(branch: SteadyBranch, p: MeanFieldParams, residual_tol: float = 1e-9) -> StabilityReport:
    """
    Classify a fixed point from the spectrum of its Jacobian.

    Stable iff every non-excluded mode has Re λ < −tol, unstable iff any has
    Re λ > tol, marginal otherwise or when the hyperbolic part is
    ill-conditioned.
    """
    if branch.residual >= residual_tol:
        raise ValueError(f"branch residual {branch.residual:.2e} is not a fixed point")
    v = branch.state.to_vector()
    jac = mf_jacobian(v, p)
    fd = finite_difference_jacobian(v, p)
    mismatch = float(np.max(np.abs(jac - fd)) / max(1.0, np.max(np.abs(jac))))
    warnings = []
    if mismatch > JACOBIAN_TOL:
        warnings.append(f"analytic and finite-difference Jacobians differ by {mismatch:.2e}")
        logger.warning("%s: %s", branch.label, warnings[-1])

    eigvals, left, right = la.eig(jac, left=True, right=True)
    scale = max(1.0, float(np.max(np.abs(eigvals))))
    tol = NEUTRAL_TOL * scale
    neutral = np.abs(eigvals.real) < tol
    hyperbolic = ~neutral
    neutral_idx = np.flatnonzero(neutral)
    roles, overlaps = _neutral_roles(eigvals, left, right, v, p, neutral_idx, tol)
    unexplained = roles.count("unexplained")

    classification = Stability.MARGINAL
    leading = complex("nan")
    if np.any(hyperbolic):
        lam = eigvals[hyperbolic]
        leading = complex(lam[np.argmax(lam.real)])
        cond = [1.0]
        for j in np.flatnonzero(hyperbolic):
            # repeated eigenvalues have no meaningful left/right pairing
            if np.sum(np.abs(eigvals - eigvals[j]) < tol) > 1:
                continue
            cond.append(1.0 / max(abs(np.vdot(_unit(left[:, j]), _unit(right[:, j]))), 1e-300))
        if max(cond) > CONDITION_LIMIT:
            warnings.append(f"ill-conditioned spectrum (eigenvalue condition {max(cond):.1e})")
            logger.warning("%s: %s", branch.label, warnings[-1])
        elif np.any(lam.real > tol):
            classification = Stability.UNSTABLE
        elif np.all(lam.real < -tol) and unexplained == 0:
            classification = Stability.STABLE
    else:
        leading = complex(eigvals[np.argmax(eigvals.real)])
    if unexplained and classification == Stability.MARGINAL:
        warnings.append(f"{unexplained} neutral mode(s) without a conserved, motional or decoupled origin")
        logger.info("%s: %s", branch.label, warnings[-1])

    branch.stability = classification.value
    branch.leading_eigenvalue = leading
    branch.warnings.extend(warnings)
    logger.debug("%s: %s (leading Re λ = %.4g, neutral roles %s)",
                 branch.label, classification.value, leading.real, roles)
    return StabilityReport(
        classification=classification,
        eigenvalues=eigvals,
        eigenvectors=right,
        neutral=eigvals[neutral],
        neutral_roles=roles,
        leading=leading,
        jacobian_mismatch=mismatch,
        conserved_overlap=overlaps,
        warnings=warnings,
    )
