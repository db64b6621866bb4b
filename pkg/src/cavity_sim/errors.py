"""
Exception hierarchy for the simulator.

Input problems subclass ``ValueError`` (CLI exit code 2); runtime invariant
trips subclass ``NumericalInvariantError`` (CLI exit code 3).
"""
from typing import List, Optional


class CavitySimError(Exception):
    """Base class for every simulator error."""


class SpaceError(CavitySimError, ValueError):
    """Invalid space descriptor, operator kind or axis."""


class ConfigValidationError(CavitySimError, ValueError):
    """Aggregated configuration problems."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.errors))


class NumericalInvariantError(CavitySimError):
    """A numerical invariant was violated during a run."""


class LeakageError(NumericalInvariantError):
    def __init__(self, population: float, tol: float, l_max: Optional[tuple] = None):
        self.population = population
        self.tol = tol
        super().__init__(
            f"momentum ladder leakage {population:.3e} exceeds {tol:.1e} "
            f"(l_max={l_max}); raise l_max"
        )


class TailError(NumericalInvariantError):
    def __init__(self, population: float, tol: float, n_max: int):
        self.population = population
        self.tol = tol
        self.n_max = n_max
        super().__init__(
            f"Fock tail population {population:.3e} exceeds {tol:.1e} "
            f"(N_max={n_max}); raise N_max"
        )


class IntegrationError(NumericalInvariantError):
    """NaN/overflow or drift beyond tolerance."""


class NormCollapseError(NumericalInvariantError):
    """State norm fell below threshold before renormalization."""


class EigenSolverError(NumericalInvariantError):
    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


class ParityDriftError(NumericalInvariantError):
    """Conserved parity expectation drifted beyond tolerance."""
