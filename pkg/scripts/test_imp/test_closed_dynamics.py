"""
Test suite for closed-system dynamics.

Tests cover:
1. Bessel oracle identities
2. Hamiltonian structure (symmetry, parity, 2D decomposition, 3D build)
3. Unitary evolution against the recoil-free oracle
4. Factorized 2D evolution against joint evolution
5. Momentum distributions and time reversal
6. Masked ground states and localization

Run with: python scripts/test_imp/test_closed_dynamics.py
"""

import sys
import time
from pathlib import Path

import numpy as np
from scipy.special import jv

CURRENT_FILE = Path(__file__).resolve()
PROJECT_ROOT = CURRENT_FILE.parents[2]
sys.path.insert(0, str(PROJECT_ROOT))

from src.app.core.config import settings
from src.cavity_sim.closed import (
    ClosedModelParams,
    ManifoldSpec,
    build_closed_hamiltonian,
    conditioned_external,
    evolve_factorized_2d,
    evolve_unitary,
    interior_mask,
    masked_ground_state,
    momentum_distribution,
    overlap_oracle,
    position_density,
    rabi_oracle,
    rabi_signal,
    rotated_hamiltonians,
    schmidt_entropy,
)
from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert import Operator, SpaceDescriptor, basis_state, build_operator

settings.show_progress = False

ONE_EXCITATION = ManifoldSpec(1)


def manifold_block(H, manifold):
    idx = manifold.indices(H.space)
    return H.matrix[idx][:, idx].toarray()


# ==============================================================================
# TEST 1: ORACLES
# ==============================================================================

def test_bessel_oracles():
    print("\n[TEST] Bessel Oracle Tests")
    start = time.perf_counter()
    for x in (1.0, 5.0, 20.0, 80.0):
        err_1d = abs(overlap_oracle(1, x) - jv(0, 2 * x))
        err_2d = abs(overlap_oracle(2, x) - jv(0, x) ** 2)
        assert err_1d < 1e-10, f"1D sum off by {err_1d:.2e} at x={x}"
        assert err_2d < 1e-10, f"2D sum off by {err_2d:.2e} at x={x}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"oracle evaluation took {elapsed:.2f}s"
    print("  [OK] truncated_sums_match_closed_forms")

    assert abs(rabi_oracle(1, 0.0)[0] - 1.0) < 1e-14, "P_e starts at 1"
    print("  [OK] rabi_oracle_initial_value")


# ==============================================================================
# TEST 2: HAMILTONIAN STRUCTURE
# ==============================================================================

def test_hamiltonian_structure():
    print("\n[TEST] Hamiltonian Structure Tests")

    space = SpaceDescriptor.ladder(1, 12)
    H = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.0), ONE_EXCITATION, space)
    evals = np.linalg.eigvalsh(manifold_block(H, ONE_EXCITATION))
    assert np.allclose(evals, -evals[::-1], atol=1e-10), "ω_r=0 spectrum should be symmetric about 0"
    print("  [OK] spectrum_symmetric_without_recoil")

    H = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.1), ONE_EXCITATION, space)
    parity = build_operator("parity", space, axis=0)
    assert H.commutator(parity).norm_max() < 1e-12, "H must commute with parity(0)"
    e0 = basis_state(space, photons=0, atom="e", momentum=0)
    g1 = basis_state(space, photons=1, atom="g", momentum=1)
    element = np.vdot(g1.amplitudes, H.matrix @ e0.amplitudes)
    assert abs(element - 0.5) < 1e-14, f"⟨g,1,l=1|H|e,0,l=0⟩ should be Ω/2, got {element}"
    print("  [OK] parity_commutes_and_coupling_element")

    outside = basis_state(space, photons=1, atom="e", momentum=0)
    assert np.max(np.abs(H.matrix @ outside.amplitudes)) == 0.0, "H must vanish outside the manifold"
    print("  [OK] manifold_projection")

    space2 = SpaceDescriptor.ladder(1, (6, 6))
    params2 = ClosedModelParams(omega=1.0, omega_r=0.05, dims=2)
    H2 = build_closed_hamiltonian(params2, ONE_EXCITATION, space2)
    h_corr, h_anti = rotated_hamiltonians(params2, ONE_EXCITATION, space2)
    assert (H2 - (h_corr + h_anti)).norm_max() < 1e-12, "H should equal H_corr + H_anti"
    inner = interior_mask(space2, margin=2)
    for name, comm in (
        ("[H, H_corr]", H2.commutator(h_corr)),
        ("[H, H_anti]", H2.commutator(h_anti)),
        ("[H_corr, H_anti]", h_corr.commutator(h_anti)),
    ):
        block = comm.matrix[inner][:, inner]
        value = float(np.max(np.abs(block.toarray()))) if block.nnz else 0.0
        assert value < 1e-12, f"{name} should vanish away from the edges, got {value:.2e}"
    print("  [OK] rotated_decomposition_commutes")

    space3 = SpaceDescriptor.ladder(1, (2, 2, 2))
    H3 = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.1, dims=3), ONE_EXCITATION, space3)
    assert H3.hermitian
    for m in range(3):
        assert H3.commutator(build_operator("parity", space3, axis=m)).norm_max() < 1e-12
    print("  [OK] three_dimensional_build")

    try:
        build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.0, dims=2), ONE_EXCITATION, space)
        raise AssertionError("dims mismatch should raise")
    except SpaceError:
        print("  [OK] dims_mismatch_rejected")


# ==============================================================================
# TEST 3: UNITARY EVOLUTION
# ==============================================================================

def test_unitary_evolution():
    print("\n[TEST] Unitary Evolution Tests")

    space = SpaceDescriptor.ladder(1, 8)
    zero = Operator(np.zeros((space.dim, space.dim)), space, hermitian=True)
    psi0 = basis_state(space, photons=0, atom="e")
    states = evolve_unitary(zero, psi0, np.linspace(0.0, 3.0, 4))
    for psi in states:
        assert abs(abs(psi.inner(psi0)) - 1.0) < 1e-12, "H=0 must leave the state unchanged"
    print("  [OK] zero_hamiltonian_identity")

    # recoil-free walk follows ½[1 + J0(2Ωt)]
    space = SpaceDescriptor.ladder(1, 64)
    params = ClosedModelParams(omega=1.0, omega_r=0.0)
    H = build_closed_hamiltonian(params, ONE_EXCITATION, space, t_max=40.0)
    times = np.linspace(0.0, 40.0, 161)
    states = evolve_unitary(H, basis_state(space, atom="e"), times, manifold=ONE_EXCITATION)
    p_e = rabi_signal(states)
    error = float(np.max(np.abs(p_e - rabi_oracle(1, times))))
    assert error < 1e-8, f"P_e deviates from the Bessel oracle by {error:.2e}"
    assert np.all((p_e >= 0.0) & (p_e <= 1.0))
    print("  [OK] rabi_signal_matches_oracle")

    dist = momentum_distribution(states[-1], "e")
    l = dist.momenta[0]
    assert dist.joint[l % 2 == 1].sum() < 1e-12, "excited atoms only carry even momenta"
    assert abs(dist.total - p_e[-1]) < 1e-12, "distribution total should equal P_e"
    print("  [OK] excited_distribution_even_momenta")

    # forward then backward
    H_r = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.01), ONE_EXCITATION, space)
    psi0 = basis_state(space, atom="e")
    forward = evolve_unitary(H_r, psi0, np.linspace(0.0, 10.0, 3), manifold=ONE_EXCITATION)
    backward = evolve_unitary(-H_r, forward[-1], np.linspace(0.0, 10.0, 3), manifold=ONE_EXCITATION)
    fidelity = abs(backward[-1].inner(psi0))
    assert abs(fidelity - 1.0) < 1e-6, f"time reversal fidelity {fidelity:.10f}"
    print("  [OK] time_reversal")


# ==============================================================================
# TEST 4: FACTORIZED 2D EVOLUTION
# ==============================================================================

def test_factorized_evolution():
    print("\n[TEST] Factorized 2D Evolution Tests")

    params = ClosedModelParams(omega=1.0, omega_r=0.02, dims=2)
    times = np.linspace(0.0, 4.0, 5)
    factorized = evolve_factorized_2d(params, ONE_EXCITATION, times, l_max_rotated=10)
    space = factorized.space
    assert space.motion.l_max == (20, 20)

    H = build_closed_hamiltonian(params, ONE_EXCITATION, space)
    joint = evolve_unitary(H, basis_state(space, atom="e"), times, manifold=ONE_EXCITATION)
    diff_pe = np.max(np.abs(rabi_signal(joint) - rabi_signal(factorized)))
    assert diff_pe < 1e-8, f"P_e differs by {diff_pe:.2e}"
    for k in range(len(times)):
        diff = np.max(np.abs(joint[k].amplitudes - factorized[k].amplitudes))
        assert diff < 1e-8, f"amplitudes differ by {diff:.2e} at t={times[k]}"
    print("  [OK] factorized_matches_joint")

    recoil_free = ClosedModelParams(omega=1.0, omega_r=0.0, dims=2)
    times = np.linspace(0.0, 20.0, 41)
    walk = evolve_factorized_2d(recoil_free, ONE_EXCITATION, times, l_max_rotated=40)
    error = float(np.max(np.abs(rabi_signal(walk) - rabi_oracle(2, times))))
    assert error < 1e-8, f"2D P_e deviates from ½[1+J0(Ωt)²] by {error:.2e}"
    print("  [OK] two_dimensional_oracle")

    dist = momentum_distribution(walk[-1], "e")
    assert dist.rotated_joint is not None and len(dist.rotated_marginals) == 2
    assert abs(dist.rotated_joint.sum() - dist.total) < 1e-12
    s = dist.rotated_momenta
    assert dist.rotated_marginals[0][s % 2 == 1].sum() == 0.0, "l1+l2 stays even"
    print("  [OK] rotated_distribution")


# ==============================================================================
# TEST 5: MASKED GROUND STATES
# ==============================================================================

def test_masked_ground_state():
    print("\n[TEST] Masked Ground State Tests")

    space = SpaceDescriptor.ladder(1, 40)
    H = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=1e-4), ONE_EXCITATION, space)
    result = masked_ground_state(H, ONE_EXCITATION, omega=1.0)
    assert result.degeneracy == 2, f"Expected a parity doublet, got {result.degeneracy} levels"
    labels = {level.parity["parity0"] for level in result.levels}
    assert labels == {1, -1}, f"doublet should span both sectors, got {labels}"
    print("  [OK] doublet_spans_both_parity_sectors")

    grid = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
    state = result.state
    upper = conditioned_external(state, +1, 1)
    lower = conditioned_external(state, -1, 1)
    x_upper = grid[np.argmax(position_density(upper, grid))]
    x_lower = grid[np.argmax(position_density(lower, grid))]
    assert abs(x_upper - np.pi) < 0.05, f"upper branch should sit at kx=π, found {x_upper:.3f}"
    assert min(x_lower, 2 * np.pi - x_lower) < 0.05, f"lower branch should sit at kx=0, found {x_lower:.3f}"
    overlap = abs(np.vdot(upper, lower)) / (np.linalg.norm(upper) * np.linalg.norm(lower))
    assert overlap < 1e-3, f"branch wavepackets overlap by {overlap:.2e}"
    print("  [OK] branch_wavepackets_localize")

    density = position_density(upper, grid)
    integral = density.sum() * (grid[1] - grid[0])
    assert abs(integral - 1.0) < 1e-10, f"position density integrates to {integral}"
    print("  [OK] position_density_normalized")

    small = SpaceDescriptor.ladder(1, 4)
    H_small = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.1), ONE_EXCITATION, small)

    def dressed_ket(branch, l):
        e = basis_state(small, photons=0, atom="e", momentum=l).amplitudes
        g = basis_state(small, photons=1, atom="g", momentum=l).amplitudes
        return (e + branch * g) / np.sqrt(2.0)

    for branch in (1, -1):
        hop = np.vdot(dressed_ket(branch, 1), H_small.matrix @ dressed_ket(branch, 0))
        assert abs(hop - branch * 0.5) < 1e-14, f"branch {branch:+d} hops with {hop}"
        cross = np.vdot(dressed_ket(-branch, 1), H_small.matrix @ dressed_ket(branch, 0))
        assert abs(cross) < 1e-14, "dressed branches do not mix under the coupling"
    print("  [OK] upper_branch_sees_plus_cos_potential")

    H_static = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=0.0), ONE_EXCITATION, small)
    try:
        masked_ground_state(H_static, ONE_EXCITATION, omega=1.0)
        raise AssertionError("ω_r = 0 should be rejected")
    except ValueError as e:
        assert "ω_r" in str(e)
    print("  [OK] zero_recoil_rejected")

    space2 = SpaceDescriptor.ladder(1, (16, 16))
    H2 = build_closed_hamiltonian(ClosedModelParams(omega=1.0, omega_r=1e-3, dims=2), ONE_EXCITATION, space2)
    result2 = masked_ground_state(H2, ONE_EXCITATION, omega=1.0)
    projected = conditioned_external(result2.state, +1, 1)
    entropy = schmidt_entropy(projected)
    assert abs(entropy - np.log(2.0)) < 0.05, f"Schmidt entropy {entropy:.4f} should be ln 2"
    print("  [OK] two_dimensional_masked_entropy")

    product = schmidt_entropy(basis_state(space2, atom="e"), split={"atom"})
    assert abs(product) < 1e-12, "product states carry no entanglement"
    print("  [OK] product_state_entropy")


# ==============================================================================
# MAIN TEST RUNNER
# ==============================================================================

def run_all_tests():
    print("=" * 70)
    print("CLOSED DYNAMICS TEST SUITE")
    print("=" * 70)

    test_suites = [
        ("Bessel Oracles", test_bessel_oracles),
        ("Hamiltonian Structure", test_hamiltonian_structure),
        ("Unitary Evolution", test_unitary_evolution),
        ("Factorized Evolution", test_factorized_evolution),
        ("Masked Ground State", test_masked_ground_state),
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
