"""Fidelity metrics and local-gauge optimization."""

import numpy as np
import pytest
from scipy.stats import unitary_group

from spinbus.effective import PHYS_Z, logical_on
from spinbus.metrics import (
    apply_z_gauge,
    average_gate_fidelity,
    logical_operator,
    optimize_local,
    optimize_local_su2,
    process_fidelity,
    su2_gauge_align,
    transformation_fidelity,
    unitarity,
    z_gauge_align,
)


def test_transformation_fidelity_trivial(rng):
    U = unitary_group.rvs(8, random_state=1)
    assert transformation_fidelity(U, U) == pytest.approx(1.0)


def test_transformation_fidelity_zero_overlap():
    # traceless relative unitary: Tr[U_a^dag U_b] = 0
    U_a = np.eye(8, dtype=complex)
    U_b = np.diag(np.exp(1j * np.pi * np.arange(8) / 4))
    assert abs(np.trace(U_b)) < 1e-12
    assert transformation_fidelity(U_a, U_b) == pytest.approx(1.0 / 9.0)


def test_transformation_fidelity_formula_oracle(rng):
    """Independent re-evaluation of the published formula."""
    U_a = unitary_group.rvs(8, random_state=7)
    U_b = unitary_group.rvs(8, random_state=8)
    d = 8
    f_e = abs(np.trace(U_a.conj().T @ U_b)) ** 2 / d**2
    expected = (d * f_e + 1) / (d + 1)
    assert transformation_fidelity(U_a, U_b) == pytest.approx(expected, rel=1e-12)
    assert process_fidelity(U_a, U_b) == pytest.approx(f_e, rel=1e-12)


def test_transformation_fidelity_global_phase_invariance(rng):
    U_a = unitary_group.rvs(8, random_state=3)
    U_b = unitary_group.rvs(8, random_state=4)
    f = transformation_fidelity(U_a, U_b)
    assert transformation_fidelity(np.exp(0.7j) * U_a, U_b) == pytest.approx(f)
    assert transformation_fidelity(U_a, np.exp(-1.2j) * U_b) == pytest.approx(f)


def test_average_gate_fidelity_cases(rng):
    G = logical_operator("CNOT_TD")
    assert average_gate_fidelity(G, G) == pytest.approx(1.0)
    assert average_gate_fidelity(np.zeros((8, 8)), G) == pytest.approx(0.0)
    # leakage shows through the UU^dag term
    U = 0.5 * G
    assert average_gate_fidelity(U, G) == pytest.approx((0.25 * 8 + 0.25 * 64) / 72)


def test_average_gate_fidelity_frame_invariance(rng):
    U = unitary_group.rvs(8, random_state=11)
    G = unitary_group.rvs(8, random_state=12)
    V = unitary_group.rvs(8, random_state=13)
    f = average_gate_fidelity(U, G)
    assert average_gate_fidelity(V @ U, V @ G) == pytest.approx(f, rel=1e-12)


def test_unitarity_values(rng):
    U = unitary_group.rvs(8, random_state=21)
    assert unitarity(U) == pytest.approx(1.0)
    assert unitarity(0.5 * U) == pytest.approx(0.25)


def test_optimize_local_recovers_injected_phases():
    G = logical_operator("CNOT_TD")
    phases = np.array([0.2, 0.9, -1.3, 0.5, -0.4, 1.7, 0.3])
    U = apply_z_gauge(G, -phases)  # apply the inverse gauge
    rep = optimize_local(U, G, gauge="z")
    assert rep.average_gate_fidelity == pytest.approx(1.0, abs=1e-8)
    # the recovered gauge undoes the injected one exactly
    U_back = apply_z_gauge(U, rep.optimized_local_phases)
    f = average_gate_fidelity(U_back, G)
    assert f == pytest.approx(1.0, abs=1e-8)


def test_optimize_local_identity_start():
    G = logical_operator("CZ_T3")
    rep = optimize_local(G, G, gauge="z")
    assert rep.average_gate_fidelity == pytest.approx(1.0, abs=1e-10)


def test_optimize_local_never_below_unoptimized(rng):
    for k in range(3):
        U = unitary_group.rvs(8, random_state=100 + k)
        G = logical_operator("CNOT_TD")
        rep = optimize_local(U, G, gauge="z")
        assert rep.average_gate_fidelity >= average_gate_fidelity(U, G) - 1e-12


def test_optimize_local_grid_oracle():
    """Dense two-parameter grid search (10 degree resolution plus
    refinement) agrees with the optimizer on a constrained case."""
    G = logical_operator("CNOT_TD")
    true = np.array([0.0, 0.0, 1.1, 0.0, 0.0, -0.7, 0.0])
    U = apply_z_gauge(G, -true)

    def f_of(p_T, q_T):
        x = np.array([0.0, 0.0, p_T, 0.0, 0.0, q_T, 0.0])
        return average_gate_fidelity(apply_z_gauge(U, x), G)

    grid = np.deg2rad(np.arange(-180, 180, 10))
    best = max(((f_of(a, b), a, b) for a in grid for b in grid))
    fine_a = best[1] + np.deg2rad(np.linspace(-5, 5, 41))
    fine_b = best[2] + np.deg2rad(np.linspace(-5, 5, 41))
    best_fine = max(((f_of(a, b), a, b) for a in fine_a for b in fine_b))
    rep = optimize_local(U, G, gauge="z")
    assert rep.average_gate_fidelity >= best_fine[0] - 1e-6


def test_z_align_matches_nm(rng):
    """The coordinate-wise exact Z alignment never loses to Nelder-Mead
    on gate-like inputs."""
    G = logical_operator("CNOT_TD")
    for k in range(3):
        noise = 0.05 * (rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
        U, _ = np.linalg.qr(G + noise)
        rep = optimize_local(U, G, gauge="z")
        fid, _ = z_gauge_align(U, G, start=rep.optimized_local_phases)
        assert fid >= rep.average_gate_fidelity - 1e-9


def test_su2_alignment_recovers_local_rotations(rng):
    G = logical_operator("CNOT_TD")

    def rand_su2(seed):
        return unitary_group.rvs(2, random_state=seed)

    pre = np.kron(np.kron(rand_su2(1), rand_su2(2)), rand_su2(3))
    post = np.kron(np.kron(rand_su2(4), rand_su2(5)), rand_su2(6))
    U = post.conj().T @ G @ pre.conj().T
    fid, A, B = optimize_local_su2(U, G)
    assert fid == pytest.approx(1.0, abs=1e-9)


def test_su2_beats_z_on_x_error():
    """A transverse local error is invisible to Z-only gauges but fully
    removed by the SU(2) alignment."""
    from scipy.linalg import expm

    G = logical_operator("CNOT_TD")
    err = expm(-0.2j * logical_on(1, np.array([[0, 1], [1, 0]], dtype=complex)))
    U = err @ G
    rep = optimize_local(U, G, gauge="z")
    fid_su2, _, _ = optimize_local_su2(U, G)
    assert fid_su2 > rep.average_gate_fidelity + 1e-3
    assert fid_su2 == pytest.approx(1.0, abs=1e-9)


def test_logical_operator_structure():
    cz = logical_operator("CZ_T3")
    assert np.abs(cz - np.diag(np.diag(cz))).max() == 0.0
    assert np.real(np.diag(cz)).tolist() == [1, 1, 1, -1, 1, 1, 1, -1]
    cnot = logical_operator("CNOT_TD")
    # control D: identity block for q_D = 0, X on T for q_D = 1
    assert np.abs(cnot[:4, :4] - np.eye(4)).max() == 0.0
    x_block = cnot[4:, 4:]
    expected = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    assert np.abs(x_block - expected).max() == 0.0
    with pytest.raises(ValueError):
        logical_operator("SWAP")
