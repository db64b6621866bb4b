"""
Field Wigner distribution W(α) = (2/π) Tr[ρ D(α) Π D(−α)] on a square grid
in the α plane (x = Re α, y = Im α), normalized so that Σ W δ² = 1.

Grid values are indexed [i, j] = (x_i, y_j).
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union
import logging

import numpy as np
import pandas as pd
import qutip
import scipy.linalg as la
from joblib import Parallel, delayed
from scipy.interpolate import RegularGridInterpolator

from src.app.core.config import settings
from src.cavity_sim.hilbert import ReducedDensityMatrix
from src.utils.metrics import local_maxima, smooth_box

logger = logging.getLogger("cavity_sim.open_system.wigner")

COVERAGE_SIGMAS = 4.0
FieldState = Union[ReducedDensityMatrix, np.ndarray]


@dataclass
class WignerGrid:
    half_width: float
    step: float
    values: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.half_width > 0 or not self.step > 0:
            raise ValueError("Wigner grid needs a positive half-width and step")
        if self.step > self.half_width:
            raise ValueError("Wigner step larger than the half-width")

    @classmethod
    def default(cls) -> "WignerGrid":
        return cls(settings.wigner_half_width, settings.wigner_step)

    @property
    def axis(self) -> np.ndarray:
        n = int(round(2 * self.half_width / self.step)) + 1
        return np.linspace(-self.half_width, self.half_width, n)

    def normalization(self) -> float:
        return float(self.values.sum() * self.step ** 2)

    def marginal(self, axis: str = "real") -> np.ndarray:
        """Integrate out the other quadrature."""
        return self.values.sum(axis=1 if axis == "real" else 0) * self.step

    def log_abs(self, floor: float = 1e-12) -> np.ndarray:
        """log₁₀|W| for log-scale rendering."""
        return np.log10(np.maximum(np.abs(self.values), floor))

    def to_frame(self) -> pd.DataFrame:
        x, y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return pd.DataFrame({"x": x.ravel(), "p": y.ravel(), "W": self.values.ravel()})


def _fock_matrix(rho_field: FieldState) -> np.ndarray:
    matrix = rho_field.matrix if isinstance(rho_field, ReducedDensityMatrix) else np.asarray(rho_field)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"field state must be a square Fock matrix, got shape {matrix.shape}")
    return matrix


def _wigner_rows(rho: np.ndarray, xvec: np.ndarray, yvec: np.ndarray) -> np.ndarray:
    # g = 2 puts qutip's (x, p) on (Re α, Im α); qutip returns [p, x]
    return qutip.wigner(qutip.Qobj(rho), xvec, yvec, method="iterative", g=2.0).T


def field_moments(rho_field: FieldState) -> dict:
    """⟨a⟩ and the spreads of x = Re α and y = Im α quadratures."""
    rho = _fock_matrix(rho_field)
    n = np.arange(rho.shape[0])
    a = np.diag(np.sqrt(n[1:].astype(float)), 1)
    mean_a = complex(np.trace(a @ rho))
    x_op = 0.5 * (a + a.conj().T)
    y_op = -0.5j * (a - a.conj().T)
    var = {}
    for name, op in (("x", x_op), ("y", y_op)):
        mean = float(np.real(np.trace(op @ rho)))
        var[name] = max(float(np.real(np.trace(op @ op @ rho))) - mean ** 2, 0.0)
    return {"mean_a": mean_a, "sigma_x": np.sqrt(var["x"]), "sigma_y": np.sqrt(var["y"])}


def recommended_half_width(rho_field: FieldState) -> float:
    m = field_moments(rho_field)
    return float(max(
        abs(m["mean_a"].real) + COVERAGE_SIGMAS * m["sigma_x"],
        abs(m["mean_a"].imag) + COVERAGE_SIGMAS * m["sigma_y"],
    ))


def wigner(rho_field: FieldState, grid: Optional[WignerGrid] = None, jobs: Optional[int] = None) -> WignerGrid:
    """
    Evaluate the Wigner distribution of a Fock-basis field state.

    Args:
        rho_field: reduced field density matrix (partial trace keeping the photon)
        grid: target grid (settings defaults when omitted); values are filled in
        jobs: joblib workers over row chunks

    Returns:
        The grid with ``values`` set. A warning (with a recommended half-width)
        is attached when the grid covers fewer than 4 standard deviations.
    """
    rho = _fock_matrix(rho_field)
    grid = WignerGrid.default() if grid is None else grid
    jobs = settings.jobs if jobs is None else jobs
    axis = grid.axis

    need = recommended_half_width(rho)
    if need > grid.half_width:
        message = f"Wigner grid half-width {grid.half_width:g} is too small; recommended A ≥ {np.ceil(need):g}"
        logger.warning(message)
        grid.warnings.append(message)

    chunks = np.array_split(np.arange(axis.size), max(1, jobs))
    parts = Parallel(n_jobs=jobs)(
        delayed(_wigner_rows)(rho, axis[rows], axis) for rows in chunks if rows.size
    )
    grid.values = np.concatenate(parts, axis=0)
    norm = grid.normalization()
    logger.debug("Wigner on %d×%d grid, Σ W δ² = %.6f", axis.size, axis.size, norm)
    return grid


def wigner_displaced_parity(rho_field: FieldState, alpha: complex, pad: Optional[int] = None) -> float:
    """
    Direct (2/π) Tr[ρ D(α) Π D(−α)] in a padded Fock space.

    Meant for small states; the padding must hold D(α) acting on the
    occupied levels.
    """
    rho = _fock_matrix(rho_field)
    pad = 40 + int(np.ceil(4 * abs(alpha) ** 2)) if pad is None else pad
    dim = rho.shape[0] + pad
    n = np.arange(dim)
    a = np.diag(np.sqrt(n[1:].astype(float)), 1)
    disp = la.expm(alpha * a.conj().T - np.conj(alpha) * a)
    parity = np.diag((-1.0) ** n)
    big = np.zeros((dim, dim), dtype=complex)
    big[: rho.shape[0], : rho.shape[0]] = rho
    value = np.trace(big @ disp @ parity @ disp.conj().T)
    return float(2.0 / np.pi * np.real(value))


def _hermite_functions(n_levels: int, q: np.ndarray) -> np.ndarray:
    """Normalized oscillator eigenfunctions ⟨q|n⟩, rows n."""
    out = np.zeros((n_levels, q.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * q ** 2)
    if n_levels > 1:
        out[1] = np.sqrt(2.0) * q * out[0]
    for n in range(1, n_levels - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * q * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def quadrature_distribution(rho_field: FieldState, x: np.ndarray, axis: str = "real") -> np.ndarray:
    """
    Probability density of Re α (axis="real") or Im α (axis="imag") computed
    from ρ directly, in the same units as the Wigner marginals.
    """
    rho = _fock_matrix(rho_field)
    x = np.asarray(x, dtype=float)
    if axis == "imag":
        phase = (-1j) ** np.arange(rho.shape[0])
        rho = phase[:, None] * rho * phase.conj()[None, :]
    elif axis != "real":
        raise ValueError(f"axis must be 'real' or 'imag', got {axis!r}")
    q = np.sqrt(2.0) * x
    psi = _hermite_functions(rho.shape[0], q)
    density_q = np.real(np.einsum("mi,mn,ni->i", psi, rho, psi))
    return np.sqrt(2.0) * density_q


@dataclass
class WignerPeak:
    alpha: complex
    value: float
    prominence: float


def _interpolator(grid: WignerGrid, values: Optional[np.ndarray] = None) -> RegularGridInterpolator:
    return RegularGridInterpolator((grid.axis, grid.axis), grid.values if values is None else values)


def segment_minimum(grid: WignerGrid, p1: complex, p2: complex, samples: Optional[int] = None,
                    values: Optional[np.ndarray] = None) -> Tuple[float, complex]:
    """Minimum of W along the straight segment p1 → p2 (bilinear interpolation)."""
    if samples is None:
        samples = max(3, int(np.ceil(abs(p2 - p1) / grid.step)) * 2 + 1)
    s = np.linspace(0.0, 1.0, samples)
    points = p1 + s * (p2 - p1)
    coords = np.column_stack([points.real, points.imag])
    coords = np.clip(coords, -grid.half_width, grid.half_width)
    line = _interpolator(grid, values)(coords)
    k = int(np.argmin(line))
    return float(line[k]), complex(points[k])


def find_wigner_peaks(grid: WignerGrid, rel_prominence: float = 0.1) -> List[WignerPeak]:
    """
    Local maxima of the 3×3-smoothed distribution whose prominence is at
    least ``rel_prominence`` × the global maximum.

    A peak's prominence is its height above the highest valley (segment
    minimum) separating it from any taller peak; the tallest peak is measured
    against zero.
    """
    if grid.values is None:
        raise ValueError("Wigner grid has no values")
    smooth = smooth_box(grid.values, 3)
    axis = grid.axis
    candidates = [
        WignerPeak(complex(axis[i], axis[j]), float(smooth[i, j]), 0.0)
        for i, j in local_maxima(smooth, 3)
        if smooth[i, j] > 0
    ]
    if not candidates:
        return []
    candidates.sort(key=lambda peak: peak.value, reverse=True)
    top = candidates[0].value
    kept = []
    for k, peak in enumerate(candidates):
        if k == 0:
            peak.prominence = peak.value
        else:
            valleys = [segment_minimum(grid, peak.alpha, taller.alpha, values=smooth)[0]
                       for taller in candidates[:k]]
            peak.prominence = peak.value - max(max(valleys), 0.0)
        if peak.prominence >= rel_prominence * top:
            kept.append(peak)
    logger.debug("%d Wigner peak(s) kept of %d candidates", len(kept), len(candidates))
    return kept
