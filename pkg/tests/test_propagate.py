"""Propagator correctness: exactness, convergence, unitarity, fast paths."""

import numpy as np
import pytest

from spinbus.device import DriveSpec
from spinbus.hamiltonian import TimeDependentHamiltonian, build_time_dependent
from spinbus.propagate import (
    PropagationError,
    project_trace,
    propagate_static,
    propagate_timedep,
    required_dt,
)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def test_static_identity_at_zero(rng):
    H = random_hermitian(rng, 12)
    tr = propagate_static(H, [0.0], store_full=True)
    assert np.abs(tr.U_full[0] - np.eye(12)).max() < 1e-12


def test_static_diagonal_phases():
    w = np.array([0.5, -1.25, 2.0])
    tr = propagate_static(np.diag(w), [0.7], store_full=True)
    expected = np.diag(np.exp(-2j * np.pi * w * 0.7))
    assert np.abs(tr.U_full[0] - expected).max() < 1e-12


def test_static_vs_rk4_oracle(rng):
    """Independent fixed-step 4th-order integrator agrees to < 1e-8."""
    dim = 20
    H = random_hermitian(rng, dim, scale=0.5)
    t_end = 10.0
    tr = propagate_static(H, [t_end], store_full=True)
    U = np.eye(dim, dtype=complex)
    dt = 5e-4
    n = int(round(t_end / dt))

    def deriv(M):
        return -2j * np.pi * (H @ M)

    for _ in range(n):
        k1 = deriv(U)
        k2 = deriv(U + dt / 2 * k1)
        k3 = deriv(U + dt / 2 * k2)
        k4 = deriv(U + dt * k3)
        U = U + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.abs(U - tr.U_full[0]).max() < 1e-8


def test_static_energy_conservation(rng):
    H = random_hermitian(rng, 16)
    psi0 = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi0 /= np.linalg.norm(psi0)
    e0 = np.real(psi0.conj() @ H @ psi0)
    tr = propagate_static(H, np.linspace(0, 50, 7), store_full=True)
    for U in tr.U_full:
        psi = U @ psi0
        e = np.real(psi.conj() @ H @ psi)
        assert abs(e - e0) < 1e-9 * max(abs(e0), 1.0)


def _toy_tdh(rng, dim=14, f_drive=1.3):
    H0 = random_hermitian(rng, dim, scale=0.4)
    V = random_hermitian(rng, dim, scale=0.1)
    drive = DriveSpec(amplitude=0.05, frequency=f_drive)
    return TimeDependentHamiltonian(
        H_static=H0, drive=drive, drive_operator=V, f_max=f_drive
    )


def test_timedep_zero_envelope_matches_static(rng):
    dim = 10
    H0 = random_hermitian(rng, dim, scale=0.4)
    tdh = TimeDependentHamiltonian(
        H_static=H0,
        drive=DriveSpec(amplitude=0.0, frequency=2.0),
        drive_operator=np.zeros((dim, dim)),
        f_max=2.0,
    )
    tr = propagate_timedep(tdh, 5.0, 0.01, sample_times=[5.0], store_full=True)
    ref = propagate_static(H0, [tr.times[-1]], store_full=True)
    assert np.abs(tr.U_full[-1] - ref.U_full[0]).max() < 1e-8


def test_timedep_richardson_convergence(rng):
    """Halving dt reduces the error by ~4 (second-order accuracy)."""
    dim = 12
    H0 = random_hermitian(rng, dim, scale=0.4)
    V = random_hermitian(rng, dim, scale=0.15)
    tdh = TimeDependentHamiltonian(
        H_static=H0,
        tunnel_envelope=lambda t: np.sin(2 * np.pi * 0.8 * t) ** 2,
        tunnel_operator=V,
        f_max=1.0,
    )
    t_end = 4.0
    U = {}
    for dt in (0.008, 0.004, 0.002):
        tr = propagate_timedep(tdh, t_end, dt, sample_times=[t_end],
                               store_full=True, quantize_levels=None)
        U[dt] = tr.U_full[-1]
    e1 = np.abs(U[0.008] - U[0.002]).max()
    e2 = np.abs(U[0.004] - U[0.002]).max()
    # error(dt) ~ C dt^2: e1/e2 = (64-4)/(16-4) = 5 against the shared reference
    ratio = e1 / e2
    assert 3.5 < ratio < 6.5


def test_timedep_unitarity(rng):
    tdh = _toy_tdh(rng)
    tr = propagate_timedep(tdh, 8.0, 0.004, sample_times=[8.0], store_full=True)
    U = tr.U_full[-1]
    assert np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() < 1e-9


def test_timedep_composition(rng):
    """Piecewise composition over [0, t1] then [t1, t2] equals one shot."""
    dim = 8
    H0 = random_hermitian(rng, dim, scale=0.3)
    V = random_hermitian(rng, dim, scale=0.05)

    def envelope(t):
        return 0.3 * np.sin(2 * np.pi * 0.11 * t) ** 2

    tdh = TimeDependentHamiltonian(
        H_static=H0, tunnel_envelope=envelope, tunnel_operator=V, f_max=1.0
    )
    dt = 0.005
    full = propagate_timedep(tdh, 6.0, dt, sample_times=[3.0, 6.0], store_full=True,
                             quantize_levels=None)
    U_mid, U_end = full.U_full
    assert np.abs(U_end - (U_end @ U_mid.conj().T) @ U_mid).max() < 1e-10
    # restart from t1 using a shifted envelope
    tdh2 = TimeDependentHamiltonian(
        H_static=H0,
        tunnel_envelope=lambda t: envelope(t + 3.0),
        tunnel_operator=V,
        f_max=1.0,
    )
    seg = propagate_timedep(tdh2, 3.0, dt, sample_times=[3.0], store_full=True,
                            quantize_levels=None)
    assert np.abs(seg.U_full[0] @ U_mid - U_end).max() < 1e-9


def test_dt_refusal(rng):
    tdh = _toy_tdh(rng, f_drive=4.0)
    with pytest.raises(ValueError, match="too coarse"):
        propagate_timedep(tdh, 1.0, 0.01)
    assert required_dt(tdh) == pytest.approx(1.0 / 200.0)


def test_nonfinite_envelope_rejected(rng):
    dim = 6
    H0 = random_hermitian(rng, dim)
    tdh = TimeDependentHamiltonian(
        H_static=H0,
        tunnel_envelope=lambda t: np.nan,
        tunnel_operator=np.eye(dim),
        f_max=1.0,
    )
    with pytest.raises((PropagationError, ValueError)):
        propagate_timedep(tdh, 1.0, 0.01, sample_times=[1.0])


def test_quantized_cache_matches_exact(rng):
    """Coefficient quantization at high resolution reproduces the exact
    midpoint stepper."""
    dim = 10
    H0 = random_hermitian(rng, dim, scale=0.3)
    V = random_hermitian(rng, dim, scale=0.08)

    def envelope(t):
        return np.sin(np.pi * t / 5.0) ** 2

    tdh = TimeDependentHamiltonian(
        H_static=H0, tunnel_envelope=envelope, tunnel_operator=V, f_max=1.0
    )
    exact = propagate_timedep(tdh, 5.0, 0.005, sample_times=[5.0], store_full=True,
                              quantize_levels=None)
    quant = propagate_timedep(tdh, 5.0, 0.005, sample_times=[5.0], store_full=True,
                              quantize_levels=4096)
    assert np.abs(exact.U_full[0] - quant.U_full[0]).max() < 5e-5


def test_periodic_richardson(rng):
    """The periodic fast path is also second order at commensurate
    sample times (integer periods, step counts sharing divisors)."""
    tdh = _toy_tdh(rng, f_drive=2.0)
    period = 0.5
    t_end = 8 * period
    U = {}
    for n_per in (60, 120, 240):
        dt = period / n_per
        tr = propagate_timedep(tdh, t_end, dt, sample_times=[t_end], store_full=True)
        assert tr.times[-1] == pytest.approx(t_end, abs=1e-12)
        U[n_per] = tr.U_full[-1]
    e1 = np.abs(U[60] - U[240]).max()
    e2 = np.abs(U[120] - U[240]).max()
    assert 3.5 < e1 / e2 < 6.5


def test_periodic_path_matches_stepper(rng):
    """The period-power fast path equals the plain stepper."""
    tdh = _toy_tdh(rng, f_drive=2.0)
    assert tdh.periodic_drive
    t_end = 7.0 / 2.0  # seven half-periods
    fast = propagate_timedep(tdh, t_end, 0.002, sample_times=[1.0, t_end], store_full=True)
    # force the general path by marking the drive non-periodic
    tdh2 = TimeDependentHamiltonian(
        H_static=tdh.H_static,
        drive=DriveSpec(amplitude=0.05, frequency=2.0, duration=1e9),
        drive_operator=tdh.drive_operator,
        f_max=2.0,
    )
    assert not tdh2.periodic_drive
    slow = propagate_timedep(tdh2, t_end, 0.002, sample_times=list(fast.times), store_full=True)
    for Uf, Us in zip(fast.U_full, slow.U_full):
        assert np.abs(Uf - Us).max() < 1e-9


def test_project_trace_contract(rng):
    dim, k = 12, 4
    H = random_hermitian(rng, dim)
    tr = propagate_static(H, [0.0, 2.0], store_full=True)
    q, _ = np.linalg.qr(rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k)))
    P = q[:, :k]
    proj = project_trace(tr, P)
    assert np.abs(proj[0] - np.eye(k)).max() < 1e-12
    for M in proj:
        u = np.real(np.trace(M.conj().T @ M)) / k
        assert u <= 1 + 1e-9
    with pytest.raises(ValueError, match="isometry"):
        project_trace(tr, 2.0 * P)
    bad = propagate_static(np.eye(5), [0.0], store_full=True)
    with pytest.raises(ValueError, match="dimension mismatch"):
        project_trace(bad, P)


def test_block_identity_projection(rng):
    """Block-diagonal U with identity on range(P) projects to identity."""
    dim, k = 10, 3
    P = np.zeros((dim, k))
    P[:k, :k] = np.eye(k)
    U = np.eye(dim, dtype=complex)
    w = np.exp(1j * rng.normal(size=dim - k))
    U[k:, k:] = np.diag(w)
    assert np.abs(P.conj().T @ U @ P - np.eye(k)).max() < 1e-12
