"""
Test suite for heterodyne quantum trajectories.

Tests cover:
1. Single SSE steps (dark vacuum, parity, norm collapse, zero-noise decay)
2. Trajectory runner (reproducibility, streams, parity bookkeeping)
3. Switch detection on synthetic currents
4. Ensemble averages against the master equation
5. Toy conditioned states, branch correlation and spectral peaks

Run with: python scripts/test_imp/test_trajectories.py
"""

import sys
from math import factorial
from pathlib import Path

import numpy as np

CURRENT_FILE = Path(__file__).resolve()
PROJECT_ROOT = CURRENT_FILE.parents[2]
sys.path.insert(0, str(PROJECT_ROOT))

from src.app.core.config import settings
from src.cavity_sim.errors import NormCollapseError
from src.cavity_sim.hilbert import DensityMatrix, SpaceDescriptor, StateVector, basis_state, build_operator
from src.cavity_sim.open_system import OpenModelParams, build_open_system, evolve_master, sector_populations
from src.cavity_sim.trajectories import (
    NO_BIMODALITY,
    HeterodyneRecord,
    SSEKernel,
    TrajectoryConfig,
    branch_correlation,
    branch_fidelity,
    detect_switches,
    dominant_frequency,
    ensemble_average,
    make_generator,
    run_trajectory,
    seed_configs,
    sse_step,
    toy_conditioned_state,
)

settings.show_progress = False


def coherent_product(alpha: complex, space: SpaceDescriptor) -> StateVector:
    """Coherent field ⊗ |g, J3=−1⟩."""
    n = np.arange(space.photon_cutoff + 1)
    c = np.array([alpha ** k / np.sqrt(float(factorial(k))) for k in n], dtype=complex)
    rest = np.zeros(4, dtype=complex)
    rest[0] = 1.0
    v = np.kron(c, rest)
    return StateVector(v / np.linalg.norm(v), space)


def trajectory_start(space: SpaceDescriptor) -> StateVector:
    """(|g,0,−1⟩ + i|e,0,−1⟩)/√2, an equal mixture of both parity sectors."""
    v = basis_state(space, 0, "g", -1).amplitudes + 1j * basis_state(space, 0, "e", -1).amplitudes
    return StateVector(v / np.sqrt(2.0), space)


def synthetic_record(current: np.ndarray, times: np.ndarray, kappa_d: float,
                     j1_sigma_minus: np.ndarray = None) -> HeterodyneRecord:
    zeros = np.zeros_like(times, dtype=complex)
    return HeterodyneRecord(
        times=times, current=current.astype(complex), sigma_minus=zeros,
        j1_sigma_minus=zeros if j1_sigma_minus is None else j1_sigma_minus.astype(complex),
        parity=np.zeros_like(times), field=zeros, photons=np.zeros_like(times),
        seed=0, stream=0, kappa_d=kappa_d, parity_drift=0.0,
    )


def square_wave(times: np.ndarray, edges, start_level: float = 1.0) -> np.ndarray:
    flips = np.searchsorted(np.asarray(edges), times, side="right")
    return np.where(flips % 2 == 0, start_level, -start_level)


# ==============================================================================
# TEST 1: SSE STEP
# ==============================================================================

def test_sse_step():
    print("\n[TEST] SSE Step Tests")

    dark = OpenModelParams(kappa=1.0, omega=0.0, omega_r=0.3, epsilon=0.0, n_max=4)
    H, jump = build_open_system(dark)
    psi = dark.initial_state
    noise = 0.013 - 0.021j
    new, dq = sse_step(psi, H, jump, 1e-3, noise)
    assert dq == noise, "vacuum is dark: dq must be pure shot noise"
    assert abs(abs(np.vdot(psi.amplitudes, new.amplitudes)) - 1.0) < 1e-12, "vacuum only acquires a phase"
    print("  [OK] dark_vacuum")

    p = OpenModelParams(kappa=1.0, omega=4.0, omega_r=0.25, epsilon=1.0, n_max=8)
    H, jump = build_open_system(p)
    rng = np.random.default_rng(7)
    labels = build_operator("parity_restricted", p.space).matrix.diagonal().real
    v = (rng.normal(size=p.space.dim) + 1j * rng.normal(size=p.space.dim)) * (labels == -1)
    v[-8:] = 0.0
    psi = StateVector(v / np.linalg.norm(v), p.space)
    parity = build_operator("parity_restricted", p.space)
    for propagator in (None, SSEKernel(H, jump, 1e-3).propagator):
        new, _ = sse_step(psi, H, jump, 1e-3, 0.02 + 0.01j, propagator=propagator)
        value = np.real(np.vdot(new.amplitudes, parity @ new.amplitudes))
        assert abs(value + 1.0) < 1e-10, f"σ3J3 moved to {value}"
        assert abs(new.norm - 1.0) < 1e-12
    print("  [OK] parity_and_norm_preserved")

    try:
        sse_step(StateVector(2.0 * psi.amplitudes, p.space), H, jump, 1e-3, 0j)
        raise AssertionError("unnormalized state should be rejected")
    except ValueError:
        print("  [OK] unnormalized_state_rejected")

    # with κ dt = 1 the Euler drift removes |1⟩ and dq is tuned to cancel |0⟩
    bare = OpenModelParams(kappa=1.0, omega=0.0, omega_r=0.0, epsilon=0.0, n_max=3)
    H0, jump0 = build_open_system(bare)
    v = basis_state(bare.space, 0, "g", -1).amplitudes + basis_state(bare.space, 1, "g", -1).amplitudes
    kernel = SSEKernel(H0, jump0, 1.0, scheme="euler")
    try:
        kernel.step(v / np.sqrt(2.0), -np.sqrt(2.0))
        raise AssertionError("collapsed norm should raise")
    except NormCollapseError:
        print("  [OK] norm_collapse_detected")

    # coherent states stay coherent without noise: ⟨n⟩ = |α|² e^{−2κt}
    decay = OpenModelParams(kappa=1.0, omega=0.0, omega_r=0.2, epsilon=0.0, n_max=14)
    H_d, jump_d = build_open_system(decay)
    number = build_operator("number", decay.space)
    start = coherent_product(1.0, decay.space).amplitudes

    def final_photons(scheme: str, dt: float) -> float:
        kernel = SSEKernel(H_d, jump_d, dt, scheme=scheme)
        v = start.copy()
        for _ in range(int(round(1.0 / dt))):
            v, _ = kernel.step(v, 0j)
        return float(np.real(np.vdot(v, number @ v)))

    exact = np.exp(-2.0)
    assert abs(final_photons("exponential", 1e-3) - exact) < 1e-8
    coarse, fine = final_photons("euler", 1e-3), final_photons("euler", 5e-4)
    assert abs(coarse - exact) < 1e-2 and abs(fine - exact) < 1e-2
    assert abs(coarse - fine) < 5e-3, f"dt halving moved ⟨n⟩ by {abs(coarse - fine):.2e}"
    print("  [OK] zero_noise_decay")


# ==============================================================================
# TEST 2: RUNNER
# ==============================================================================

def test_runner():
    print("\n[TEST] Trajectory Runner Tests")

    g1, g2, g3 = make_generator(11, 0), make_generator(11, 0), make_generator(11, 1)
    assert isinstance(g1.bit_generator, np.random.Philox)
    first = g1.normal(size=5)
    assert np.array_equal(first, g2.normal(size=5))
    assert not np.array_equal(first, g3.normal(size=5))
    print("  [OK] seeded_streams")

    model = OpenModelParams(kappa=1.0, omega=4.0, omega_r=0.25, epsilon=1.0, n_max=16)
    cfg = TrajectoryConfig(model=model, duration=2.0, kappa_d=0.25, seed=2024, dt=5e-3, record_stride=20)
    rec_a, rec_b = run_trajectory(cfg), run_trajectory(cfg)
    assert rec_a.times.size == 21 and abs(rec_a.times[-1] - 2.0) < 1e-12
    assert np.array_equal(rec_a.current, rec_b.current), "fixed seed must reproduce the record"
    assert np.array_equal(rec_a.field, rec_b.field)
    other = run_trajectory(cfg.with_stream(1))
    assert not np.array_equal(rec_a.current, other.current)
    print("  [OK] reproducible_records")

    assert sector_populations(model.initial_state)["-1"] == 1.0
    assert rec_a.parity_drift < 1e-6 and not rec_a.warnings
    assert np.max(np.abs(rec_a.sigma_minus)) < 1e-8, "single-sector start keeps ⟨σ−⟩ at zero"
    assert np.max(np.abs(rec_a.j1_sigma_minus)) > 1e-4
    print("  [OK] single_sector_start")

    mixed_model = OpenModelParams(kappa=1.0, omega=4.0, omega_r=0.25, epsilon=1.0, n_max=16,
                                  initial_state=trajectory_start(SpaceDescriptor.restricted(16)))
    mixed = run_trajectory(TrajectoryConfig(model=mixed_model, duration=1.0, kappa_d=0.25, seed=5,
                                            dt=5e-3, record_stride=20))
    assert abs(mixed.parity[0]) < 1e-14
    assert abs(mixed.sigma_minus[0] - 0.5j) < 1e-14
    assert mixed.warnings and "mixed-parity" in mixed.warnings[0]
    print("  [OK] mixed_sector_start")

    frame = rec_a.to_frame()
    assert list(frame.columns[:3]) == ["t", "re_I", "im_I"] and len(frame) == rec_a.times.size
    assert np.allclose(frame["n"].to_numpy(), rec_a.photons)
    print("  [OK] record_frame")

    for kwargs in ({"dt": 0.01}, {"kappa_d": 0.0}, {"scheme": "milstein"}, {"seed": -1}):
        args = {"model": model, "duration": 1.0, "kappa_d": 0.25, "seed": 1, "dt": 5e-3, **kwargs}
        try:
            TrajectoryConfig(**args)
            raise AssertionError(f"{kwargs} should be rejected")
        except ValueError:
            pass
    assert abs(TrajectoryConfig(model=model, duration=1.0, kappa_d=0.25, seed=1).dt - settings.sse_dt) < 1e-15
    print("  [OK] config_validation")


# ==============================================================================
# TEST 3: SWITCH DETECTION
# ==============================================================================

def test_switches():
    print("\n[TEST] Switch Detection Tests")

    kappa_d = 0.25
    times = np.arange(0.0, 400.0, 0.1)
    edges = [100.0, 220.0, 330.0]
    clean = square_wave(times, edges)
    glitch = (times >= 150.0) & (times < 155.0)
    clean[glitch] = 1.0
    noisy = clean + 0.1 * np.random.default_rng(3).normal(size=times.size)

    report = detect_switches(noisy, kappa_d=kappa_d, times=times)
    assert report.bimodal and report.flag is None
    assert abs(report.threshold) < 0.2, f"threshold {report.threshold} should sit between ±1"
    assert len(report.switch_times) == 3, f"found {report.switch_times}"
    assert all(abs(a - b) <= 2.0 / kappa_d for a, b in zip(report.switch_times, edges))
    print("  [OK] square_wave_switches")

    record = synthetic_record(noisy, times, kappa_d)
    detect_switches(record)
    assert record.switch_times == report.switch_times
    print("  [OK] record_switch_times")

    flat = detect_switches(np.full(times.size, 0.7), kappa_d=kappa_d, times=times)
    assert flat.switch_times == [] and not flat.bimodal and flat.flag == NO_BIMODALITY
    print("  [OK] constant_current")

    try:
        detect_switches(noisy, kappa_d=kappa_d)
        raise AssertionError("raw series without times should be rejected")
    except ValueError:
        print("  [OK] missing_times_rejected")


# ==============================================================================
# TEST 4: ENSEMBLE
# ==============================================================================

def test_ensemble():
    print("\n[TEST] Ensemble Tests")

    model = OpenModelParams(kappa=1.0, omega=4.0, omega_r=0.25, epsilon=1.0, n_max=20)
    base = TrajectoryConfig(model=model, duration=1.0, kappa_d=0.25, seed=2024, dt=1e-3, record_stride=100)

    try:
        ensemble_average(seed_configs(base, 10))
        raise AssertionError("small ensembles should be rejected")
    except ValueError:
        print("  [OK] minimum_seed_count")

    try:
        ensemble_average([base] * 60)
        raise AssertionError("repeated streams should be rejected")
    except ValueError:
        print("  [OK] repeated_streams_rejected")

    stats = ensemble_average(seed_configs(base, 100), observable="field", jobs=1)
    H, jump = build_open_system(model)
    annihilate = build_operator("annihilate", model.space)
    master = evolve_master(H, jump, DensityMatrix.from_state(model.initial_state), t_end=1.0, dt=1e-3,
                           record_every=100, observables={"a": annihilate}, rate=model.max_rate)
    assert np.allclose(stats.times, master.times)
    ok = stats.within(master.observables["a"], n_sigma=5.0, floor=2e-3)
    assert ok.all(), f"ensemble ⟨a⟩ off at t={stats.times[~ok]}"
    assert stats.n_trajectories == 100 and len(set(stats.streams)) == 100
    print("  [OK] ensemble_matches_master")

    parity = ensemble_average(seed_configs(base.with_stream(0), 50), observable="parity", jobs=1)
    assert np.max(np.abs(parity.mean + 1.0)) < 1e-6 and np.max(parity.stderr) < 1e-6
    print("  [OK] ensemble_parity_constant")


# ==============================================================================
# TEST 5: ANALYSIS
# ==============================================================================

def test_analysis():
    print("\n[TEST] Analysis Tests")

    space = SpaceDescriptor.restricted(8)
    c_n = [0.6, 0.5, 0.4, 0.3]
    sigma_minus = build_operator("sigma_minus", space)
    j1_sigma_minus = build_operator("J1", space) @ sigma_minus
    values = {}
    for sign in (1, -1):
        psi = toy_conditioned_state(sign, c_n, 0.3, 1.1, space)
        assert abs(psi.norm - 1.0) < 1e-12
        assert abs(np.vdot(psi.amplitudes, sigma_minus @ psi.amplitudes)) < 1e-12, "⟨σ−⟩ is masked"
        values[sign] = np.vdot(psi.amplitudes, j1_sigma_minus @ psi.amplitudes)
    assert abs(values[1]) > 0.1 and abs(values[1] + values[-1]) < 1e-12, f"⟨J1σ−⟩ = {values}"
    print("  [OK] toy_states_two_levels")

    fid = branch_fidelity(toy_conditioned_state(1, c_n, 0.3, 1.1, space), c_n, 0.3, 1.1)
    assert abs(fid["+"] - 1.0) < 1e-12 and fid["-"] < 1e-12
    print("  [OK] branch_fidelity")

    try:
        toy_conditioned_state(0, c_n, 0.0, 0.0, space)
        raise AssertionError("sign 0 should be rejected")
    except ValueError:
        print("  [OK] invalid_sign_rejected")

    times = np.arange(0.0, 400.0, 0.1)
    labels = square_wave(times, [100.0, 220.0, 330.0])
    rng = np.random.default_rng(9)
    record = synthetic_record(labels + 0.1 * rng.normal(size=times.size), times, 0.25,
                              j1_sigma_minus=0.3 * labels + 0.02 * rng.normal(size=times.size))
    corr = branch_correlation(record)
    assert corr > 0.8, f"branch correlation {corr:.3f}"
    flat = synthetic_record(labels, times, 0.25)
    assert np.isnan(branch_correlation(flat, threshold=0.0))
    print("  [OK] branch_correlation")

    t = np.arange(400) * 0.5
    omega = 2.0 * np.pi * 6 / 200.0
    assert abs(dominant_frequency(t, np.exp(1j * omega * t)) - omega) < 1e-12
    assert abs(dominant_frequency(t, np.cos(omega * t) + 0.3) - omega) < 1e-12
    try:
        dominant_frequency(t ** 1.1, np.cos(t))
        raise AssertionError("non-uniform sampling should be rejected")
    except ValueError:
        print("  [OK] dominant_frequency")


# ==============================================================================
# MAIN TEST RUNNER
# ==============================================================================

def run_all_tests():
    print("=" * 70)
    print("TRAJECTORIES TEST SUITE")
    print("=" * 70)

    test_suites = [
        ("SSE Step", test_sse_step),
        ("Runner", test_runner),
        ("Switches", test_switches),
        ("Ensemble", test_ensemble),
        ("Analysis", test_analysis),
    ]
    failed = 0
    for suite_name, test_func in test_suites:
        try:
            test_func()
        except Exception as e:
            failed += 1
            print(f"\n[FAIL] {suite_name}: {e}")
            import traceback
            traceback.print_exc()

    print("\n" + "=" * 70)
    print(f"Passed: {len(test_suites) - failed} / {len(test_suites)}")
    if failed == 0:
        print("\n[SUCCESS] All tests passed!")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run_all_tests())
