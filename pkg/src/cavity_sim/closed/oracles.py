"""
Closed-form references for the ladder walk.

Σ_m (−1)^m J_m(x)² = J0(2x), and the 2D double sum over J_m(x/2) factors
gives J0(x)². The Rabi envelope from |e,0,l=0⟩ is ½[1 + overlap].
"""
import numpy as np
from scipy.special import jv


def bessel_cutoff(x: float) -> int:
    """Order beyond which J_m(x)² < 1e-12 (Debye tail)."""
    x = abs(float(x))
    return int(np.ceil(x + 10.0 * np.cbrt(x) + 30))


def overlap_oracle(dims: int, x: float) -> float:
    """
    Truncated Bessel sums for the walk overlap.

    Args:
        dims: 1 or 2
        x: argument (Ωt for the Rabi problem)

    Returns:
        Σ(−1)^m J_m(x)² for dims=1, Σ(−1)^{m1+m2}|J_m1(x/2)J_m2(x/2)|² for dims=2.
    """
    if dims == 1:
        m = np.arange(-bessel_cutoff(x), bessel_cutoff(x) + 1)
        return float(np.sum((-1.0) ** m * jv(m, x) ** 2))
    if dims == 2:
        half = 0.5 * x
        m = np.arange(-bessel_cutoff(half), bessel_cutoff(half) + 1)
        terms = (-1.0) ** m * jv(m, half) ** 2
        return float(np.sum(np.outer(terms, terms)))
    raise ValueError(f"overlap oracle is defined for dims 1 and 2, got {dims}")


def rabi_oracle(dims: int, omega_t) -> np.ndarray:
    """P_e(t) for the recoil-free walk started in |e,0,l=0⟩."""
    values = np.atleast_1d(np.asarray(omega_t, dtype=float))
    return 0.5 * (1.0 + np.array([overlap_oracle(dims, x) for x in values]))
