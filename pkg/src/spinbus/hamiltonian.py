"""Assembly of the full system Hamiltonian (static + time-dependent parts).

The static part collects, on the 60 n_r dimensional sector,

    H = omega_r a^dag a
      + sum_dots eps n + (U/2) n (n - 1) + (1/2) B . S
      + V_T12 n_T1 n_T2 + V_T23 n_T2 n_T3 + V_T31 n_T3 n_T1
      - sum_links (t c^dag c + h.c.)
      + 2 g_D^AC (a^dag + a) n_D1 + 2 g_T^AC (a^dag + a) n_T1,

with S the Pauli-convention spin vector, so (1/2) B . S makes a dot with
z-field b split by exactly b (see device.py for the field bookkeeping).

Time dependence enters through two channels: the microwave drive
amplitude * cos(2 pi f t) * (n_D1 - n_D2), and a real-valued pulse on the
T2-T3 tunnel coupling, H(t) += (t23(t) - t23_base) * T_op with
T_op = -(hop_32 + hop_32^dag).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import OperatorSet, build_operators, DQD_DOTS, TQD_DOTS
from .device import DeviceParams, DriveSpec


class AssemblyError(RuntimeError):
    """Internal consistency failure while building the Hamiltonian."""


def _hermitize_check(H: np.ndarray, what: str) -> np.ndarray:
    scale = max(np.abs(H).max(), 1.0)
    dev = np.abs(H - H.conj().T).max()
    if dev > 1e-12 * scale:
        raise AssemblyError(f"{what} assembled non-Hermitian (deviation {dev:.3e})")
    return (H + H.conj().T) / 2.0


def matter_hamiltonian(params: DeviceParams, ops: OperatorSet) -> np.ndarray:
    """Matter-sector (60-dim) part: Fermi-Hubbard modules + Zeeman."""
    dim = ops.basis.matter_dim
    H = np.zeros((dim, dim), dtype=complex)
    d, t = params.dqd, params.tqd
    eps = {"D1": d.eps_D1, "D2": d.eps_D2, "T1": t.eps_T1, "T2": t.eps_T2, "T3": t.eps_T3}
    fields = {"D1": d.B_D1, "D2": d.B_D2, "T1": t.B_T1, "T2": t.B_T2, "T3": t.B_T3}
    for dot in DQD_DOTS + TQD_DOTS:
        n = ops.number[dot]
        H += eps[dot] * n
        sx, sy, sz = ops.spin[dot]
        bx, by, bz = fields[dot]
        H += 0.5 * (bx * sx + by * sy + bz * sz)
    for dot, U in (("T1", t.U_T1), ("T2", t.U_T2), ("T3", t.U_T3)):
        n = ops.number[dot]
        H += 0.5 * U * (n @ n - n)
    H += t.V_T12 * ops.number["T1"] @ ops.number["T2"]
    H += t.V_T23 * ops.number["T2"] @ ops.number["T3"]
    H += t.V_T31 * ops.number["T3"] @ ops.number["T1"]
    for (link, tc) in ((("D2", "D1"), d.t_D), (("T2", "T1"), t.t_T12),
                       (("T3", "T2"), t.t_T23), (("T1", "T3"), t.t_T31)):
        A = ops.hop[link]
        H -= tc * A + np.conj(tc) * A.conj().T
    return H


def build_static(params: DeviceParams, ops: OperatorSet | None = None) -> np.ndarray:
    """Full static Hamiltonian on the 60 n_r space (drive off, base t23)."""
    if ops is None:
        ops = build_operators(params.n_r)
    H = ops.embed_matter(matter_hamiltonian(params, ops))
    H += params.omega_r * ops.embed_resonator(ops.n_phot)
    x = ops.a + ops.a_dag
    H += 2.0 * params.g_D_AC * np.kron(ops.number["D1"], x)
    H += 2.0 * params.g_T_AC * np.kron(ops.number["T1"], x)
    return _hermitize_check(H, "static Hamiltonian")


def tunnel_pulse_op(params: DeviceParams, ops: OperatorSet | None = None) -> np.ndarray:
    """Operator multiplying a real T2-T3 tunnel-coupling value."""
    if ops is None:
        ops = build_operators(params.n_r)
    A = ops.hop[("T3", "T2")]
    return ops.embed_matter(-(A + A.conj().T))


def drive_op(params: DeviceParams, ops: OperatorSet | None = None) -> np.ndarray:
    """Charge-imbalance operator (n_D1 - n_D2) the drive couples to."""
    if ops is None:
        ops = build_operators(params.n_r)
    return ops.embed_matter(ops.number["D1"] - ops.number["D2"])


@dataclass
class TimeDependentHamiltonian:
    """H(t) = H_static + drive(t) * drive_op + (t23(t) - t23_base) * tunnel_op.

    ``tunnel_envelope`` returns the instantaneous tunnel coupling t23(t)
    in GHz (not the deviation); it must be defined and finite for every
    queried time.  ``f_max`` is the fastest relevant frequency (GHz),
    used by the propagator's step-size refusal rule.
    """

    H_static: np.ndarray
    drive: DriveSpec | None = None
    drive_operator: np.ndarray | None = None
    tunnel_envelope: Callable[[float], float] | None = None
    tunnel_operator: np.ndarray | None = None
    t23_base: float = 0.0
    f_max: float = 0.0
    periodic_drive: bool = field(default=False)

    def __post_init__(self):
        if self.drive is not None and self.drive_operator is None:
            raise AssemblyError("drive configured without its operator")
        if self.tunnel_envelope is not None and self.tunnel_operator is None:
            raise AssemblyError("tunnel envelope configured without its operator")
        self.periodic_drive = (
            self.drive is not None
            and self.drive.duration is None
            and self.tunnel_envelope is None
        )

    def coefficients(self, t: float) -> tuple[float, float]:
        """(drive coefficient, tunnel-coupling deviation) at time t (ns)."""
        c_drive = 0.0
        if self.drive is not None:
            c_drive = (
                self.drive.amplitude
                * self.drive.envelope(t)
                * np.cos(2.0 * np.pi * self.drive.frequency * t)
            )
        c_tun = 0.0
        if self.tunnel_envelope is not None:
            val = float(self.tunnel_envelope(t))
            if not np.isfinite(val):
                raise ValueError(f"tunnel envelope undefined at t = {t} ns")
            c_tun = val - self.t23_base
        return c_drive, c_tun


def build_time_dependent(
    params: DeviceParams,
    drive: DriveSpec | None = None,
    tunnel_envelope: Callable[[float], float] | None = None,
    ops: OperatorSet | None = None,
) -> TimeDependentHamiltonian:
    if ops is None:
        ops = build_operators(params.n_r)
    f_max = max(
        params.omega_r,
        params.zeeman_feature(),
        drive.frequency if drive is not None else 0.0,
    )
    t23 = params.tqd.t_T23
    if tunnel_envelope is not None and abs(complex(t23).imag) > 0:
        raise AssemblyError("tunnel pulses require a real base t_T23")
    return TimeDependentHamiltonian(
        H_static=build_static(params, ops),
        drive=drive,
        drive_operator=drive_op(params, ops) if drive is not None else None,
        tunnel_envelope=tunnel_envelope,
        tunnel_operator=tunnel_pulse_op(params, ops) if tunnel_envelope is not None else None,
        t23_base=float(np.real(t23)),
        f_max=f_max,
    )


def hamiltonian_at(t: float, tdh: TimeDependentHamiltonian) -> np.ndarray:
    """Instantaneous Hamiltonian H(t); Hermitian by construction."""
    c_drive, c_tun = tdh.coefficients(t)
    H = tdh.H_static
    if c_drive != 0.0:
        H = H + c_drive * tdh.drive_operator
    if c_tun != 0.0:
        H = H + c_tun * tdh.tunnel_operator
    return H
