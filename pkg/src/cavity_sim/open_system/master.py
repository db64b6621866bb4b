"""
Master-equation evolution and long-time steady states.

    dρ/dt = −i[H, ρ] + J ρ J† − ½{J†J, ρ}

evolve_master integrates with fixed-step RK4 on dense ρ (sparse H, J).
steady_state advances in probe windows until the trace distance between
consecutive windows drops below tolerance; a Fock-tail violation restarts the
search on a larger cutoff.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply, norm as sparse_norm
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from src.app.core.config import settings
from src.cavity_sim.errors import IntegrationError, SpaceError, TailError
from src.cavity_sim.hilbert import DensityMatrix, Operator, parity_labels
from src.cavity_sim.open_system.model import OpenModelParams, build_open_system
from src.utils.metrics import trace_norm

logger = logging.getLogger("cavity_sim.open_system.master")

TRACE_DRIFT_TOL = 1e-7
RK4_STABILITY = 2.5
POSITIVITY_TOL = 1e-6

Checkpoint = Callable[[DensityMatrix, float], None]


@dataclass
class MasterTrajectory:
    times: np.ndarray
    states: List[DensityMatrix]
    observables: Dict[str, np.ndarray]
    sector_populations: np.ndarray  # rows: (σ3J3 = +1, σ3J3 = −1) per record
    trace_drift: float
    max_tail: float

    def final(self) -> DensityMatrix:
        return self.states[-1]


@dataclass
class SteadyStateResult:
    rho: DensityMatrix
    params: OpenModelParams
    converged: bool
    residual: float
    t_reached: float
    min_eigenvalue: float
    sector_populations: Dict[str, float]
    restarts: int = 0
    warnings: List[str] = field(default_factory=list)


def tail_population(rho: DensityMatrix) -> float:
    """Population of the two highest Fock levels."""
    n_max = rho.space.photon_cutoff
    diag = np.real(np.diag(rho.matrix)).reshape(n_max + 1, -1).sum(axis=1)
    return float(diag[-2:].sum())


def _sector_masks(space) -> np.ndarray:
    labels = next(iter(parity_labels(space).values()))
    return np.stack([labels == 1, labels == -1]).astype(float)


def _effective(H: Operator, jump: Operator):
    jdj = jump.matrix.conj().T @ jump.matrix
    return (H.matrix - 0.5j * jdj).tocsr(), jump.matrix.tocsr(), jdj


def lindblad_rhs(rho: np.ndarray, h_eff: sp.csr_matrix, jump: sp.csr_matrix) -> np.ndarray:
    """Liouvillian action on a hermitian ρ."""
    a = h_eff @ rho
    b = jump @ rho
    return -1j * (a - a.conj().T) + jump @ b.conj().T


def rk4_bound(H: Operator, jump: Operator) -> float:
    """Upper bound on the Liouvillian spectral radius (1-norms)."""
    jdj = jump.matrix.conj().T @ jump.matrix
    return float(2.0 * sparse_norm(H.matrix, 1) + sparse_norm(jdj, 1))


def evolve_master(
    H: Operator,
    jump: Operator,
    rho0: DensityMatrix,
    t_end: float,
    dt: float,
    record_every: Optional[int] = None,
    observables: Optional[Dict[str, Operator]] = None,
    rate: Optional[float] = None,
    tail_tol: Optional[float] = None,
) -> MasterTrajectory:
    """
    Fixed-step RK4 integration of the master equation.

    Args:
        H, jump: Hamiltonian and jump operator on the same space
        rho0: initial density matrix (validated)
        t_end: final time
        dt: step; must satisfy dt·rate ≤ 0.02 when ``rate`` is given and
            stay inside the RK4 stability bound in any case
        record_every: keep every k-th step (None keeps the endpoints only)
        observables: operators whose expectations are sampled at each record
        rate: max(Ω, ε, κ) of the model
        tail_tol: Fock tail tolerance (settings.tail_tol by default)

    Returns:
        MasterTrajectory with snapshots, sampled observables and diagnostics.
    """
    space = rho0.space
    if H.space != space or jump.space != space:
        raise SpaceError("H, jump and ρ must share one space")
    rho0.check()
    if not t_end > 0 or not dt > 0:
        raise ValueError("t_end and dt must be positive")
    if rate is not None and dt * rate > 0.02 * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3e} does not resolve the fastest rate {rate:.3g} (dt·rate ≤ 0.02)")
    bound = rk4_bound(H, jump)
    if dt * bound > RK4_STABILITY:
        raise ValueError(f"dt={dt:.3e} exceeds the RK4 stability limit {RK4_STABILITY / bound:.3e}")
    if record_every is not None and record_every < 1:
        raise ValueError("record_every must be >= 1")
    tail_tol = settings.tail_tol if tail_tol is None else tail_tol

    n_steps = int(np.ceil(t_end / dt - 1e-9))
    dt = t_end / n_steps
    stride = n_steps if record_every is None else record_every
    h_eff, jmat, _ = _effective(H, jump)
    masks = _sector_masks(space)
    observables = observables or {}

    rho = rho0.matrix.copy()
    times, states, sectors = [], [], []
    samples: Dict[str, list] = {name: [] for name in observables}
    max_tail = 0.0

    def _record(t: float) -> None:
        nonlocal max_tail
        snapshot = DensityMatrix(rho.copy(), space)
        tail = tail_population(snapshot)
        max_tail = max(max_tail, tail)
        if tail > tail_tol:
            raise TailError(tail, tail_tol, space.photon_cutoff)
        times.append(t)
        states.append(snapshot)
        sectors.append(masks @ np.real(np.diag(rho)))
        for name, op in observables.items():
            samples[name].append(np.trace(op.matrix @ rho))

    _record(0.0)
    logger.debug("Master RK4: %d steps of dt=%.3e (dim %d)", n_steps, dt, space.dim)
    for step in tqdm(range(1, n_steps + 1), desc="master", disable=not settings.show_progress,
                     mininterval=1.0):
        k1 = lindblad_rhs(rho, h_eff, jmat)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, h_eff, jmat)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, h_eff, jmat)
        k4 = lindblad_rhs(rho + dt * k3, h_eff, jmat)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if step % stride == 0 or step == n_steps:
            if not np.all(np.isfinite(rho)):
                raise IntegrationError(f"density matrix became non-finite at t={step * dt:.4g}")
            _record(step * dt)

    drift = abs(np.trace(rho) - np.trace(rho0.matrix))
    if drift > TRACE_DRIFT_TOL:
        logger.warning("Trace drift %.2e exceeds %.0e over t=%.3g", drift, TRACE_DRIFT_TOL, t_end)
    return MasterTrajectory(
        times=np.array(times),
        states=states,
        observables={name: np.array(v) for name, v in samples.items()},
        sector_populations=np.array(sectors),
        trace_drift=float(drift),
        max_tail=max_tail,
    )


def liouvillian(H: Operator, jump: Operator) -> sp.csr_matrix:
    """Superoperator acting on row-major vec(ρ)."""
    d = H.space.dim
    eye = sp.identity(d, format="csr", dtype=complex)
    h_eff, jmat, _ = _effective(H, jump)
    return (
        -1j * sp.kron(h_eff, eye)
        + 1j * sp.kron(eye, h_eff.conj())
        + sp.kron(jmat, jmat.conj())
    ).tocsr()


class _WindowPropagator:
    """Advances ρ by one probe window with the chosen scheme."""

    def __init__(self, H: Operator, jump: Operator, window: float, method: str,
                 dt: Optional[float], rate: float):
        self.H, self.jump, self.window = H, jump, window
        self.method = method
        self.dt = dt
        self.rate = rate
        if method == "krylov":
            self.generator = (liouvillian(H, jump) * window).tocsc()
        elif method != "rk4":
            raise ValueError(f"unknown steady-state method '{method}' (expected 'krylov' or 'rk4')")

    def __call__(self, rho: DensityMatrix) -> DensityMatrix:
        if self.method == "krylov":
            d = rho.space.dim
            vec = expm_multiply(self.generator, rho.matrix.reshape(-1))
            out = vec.reshape(d, d)
            return DensityMatrix(0.5 * (out + out.conj().T), rho.space)
        return evolve_master(self.H, self.jump, rho, self.window, self.dt, rate=self.rate).final()


def _run_to_steady(
    p: OpenModelParams,
    tol: float,
    window: float,
    t_max: float,
    method: str,
    dt: Optional[float],
    checkpoint: Optional[Checkpoint],
    rho0: Optional[DensityMatrix],
) -> SteadyStateResult:
    H, jump = build_open_system(p)
    rho = p.initial_density() if rho0 is None else rho0
    if rho.space != p.space:
        raise SpaceError("resume state does not match the model space")
    step = p.max_step if dt is None else dt
    advance = _WindowPropagator(H, jump, window, method, step, p.max_rate)

    t = 0.0
    residual = float("inf")
    n_windows = int(np.ceil(t_max / window - 1e-9))
    logger.info("Steady-state search: N_max=%d, window=%.3g, t_max=%.3g (%s)",
                p.n_max, window, t_max, method)
    for _ in tqdm(range(n_windows), desc="steady", disable=not settings.show_progress):
        new = advance(rho)
        if not np.all(np.isfinite(new.matrix)):
            raise IntegrationError(f"density matrix became non-finite at t={t + window:.4g}")
        tail = tail_population(new)
        if tail > settings.tail_tol:
            raise TailError(tail, settings.tail_tol, p.n_max)
        residual = trace_norm(new.matrix - rho.matrix)
        rho = new
        t += window
        if checkpoint is not None:
            checkpoint(rho, t)
        if residual < tol:
            break

    converged = residual < tol
    warnings = []
    if not converged:
        warnings.append(f"not fully converged: residual {residual:.2e} at t={t:.4g}")
        logger.warning(warnings[-1])
    lam = rho.min_eigenvalue()
    if lam < -POSITIVITY_TOL:
        raise IntegrationError(f"steady state has negative eigenvalue {lam:.3e}")
    pops = _sector_masks(p.space) @ np.real(np.diag(rho.matrix))
    logger.info("Steady state at t=%.4g: residual %.2e, sectors (+1: %.6f, −1: %.6f)",
                t, residual, pops[0], pops[1])
    return SteadyStateResult(
        rho=rho, params=p, converged=converged, residual=float(residual), t_reached=t,
        min_eigenvalue=lam, sector_populations={"+1": float(pops[0]), "-1": float(pops[1])},
        warnings=warnings,
    )


def steady_state(
    p: OpenModelParams,
    tol: Optional[float] = None,
    probe_window: Optional[float] = None,
    t_max: Optional[float] = None,
    method: str = "krylov",
    dt: Optional[float] = None,
    checkpoint: Optional[Checkpoint] = None,
    rho0: Optional[DensityMatrix] = None,
) -> SteadyStateResult:
    """
    Evolve from ``p.initial_state`` until ρ stops changing.

    Args:
        p: model parameters (the initial parity sector is kept)
        tol: trace-distance tolerance between probe windows
        probe_window: window length in units of 1/κ
        t_max: time limit in units of 1/κ
        method: "krylov" (exact window propagator on the vectorized
            Liouvillian) or "rk4" (evolve_master per window)
        dt: RK4 step (defaults to 0.02/max(Ω, ε, κ))
        checkpoint: called with (ρ, t) after every window
        rho0: resume from this state instead of the initial state

    Returns:
        SteadyStateResult; ``params`` carries the cutoff actually used.

    Raises:
        TailError: when the tail condition still fails after
            settings.max_cutoff_restarts cutoff increases.
    """
    tol = settings.steady_tol if tol is None else tol
    window = (settings.steady_probe_window if probe_window is None else probe_window) / p.kappa
    t_max = (settings.steady_t_max if t_max is None else t_max) / p.kappa
    state = {"params": p, "rho0": rho0, "restarts": 0}

    def _grow(retry_state):
        error = retry_state.outcome.exception()
        old = state["params"]
        n_new = int(np.ceil(old.n_max * settings.cutoff_growth))
        logger.warning("%s; restarting with N_max=%d", error, n_new)
        state["params"] = old.with_cutoff(n_new)
        state["rho0"] = None
        state["restarts"] += 1

    for attempt in Retrying(
        retry=retry_if_exception_type(TailError),
        stop=stop_after_attempt(settings.max_cutoff_restarts + 1),
        before_sleep=_grow,
        reraise=True,
    ):
        with attempt:
            result = _run_to_steady(state["params"], tol, window, t_max, method, dt,
                                    checkpoint, state["rho0"])
    result.restarts = state["restarts"]
    if result.restarts:
        result.warnings.append(f"N_max raised to {result.params.n_max} after {result.restarts} restart(s)")
    return result
