"""Reference device parameter sets used by the bundled experiments.

Three closely related configurations cover all bundled experiments: the
model-validation sweep (degenerate 5.95 GHz qubit fields, 40 MHz
resonator couplings), and the gate-operation set (5.96 / 5.94 GHz
fields, 50 MHz couplings) used by the CZ, CNOT, robustness, and noise
studies.  All values in GHz; see device.py for conventions.
"""

from __future__ import annotations

from .device import DeviceParams, make_device

_COMMON = dict(
    omega_r=6.0,
    omega_3_z=5.8,
    g_D_x=0.2,
    g_T_x=0.2,
    t_D=3.5,
    t_T12=3.5,
    eps_T3=-300.0,
    U_T=2500.0,
)


def validation_device(eps: float = 0.0, t_T23: float = 1.0, n_r: int = 3) -> DeviceParams:
    """Effective-model validation configuration (degenerate D/T fields)."""
    return make_device(
        omega_D_z=5.95,
        omega_T_z=5.95,
        g_D_AC=0.04,
        g_T_AC=0.04,
        t_T23=t_T23,
        eps=eps,
        n_r=n_r,
        **_COMMON,
    )


def gate_device(eps: float = 0.0, t_T23: float = 0.0, n_r: int = 3) -> DeviceParams:
    """Gate-operation configuration (split D/T fields, 50 MHz couplers)."""
    return make_device(
        omega_D_z=5.96,
        omega_T_z=5.94,
        g_D_AC=0.05,
        g_T_AC=0.05,
        t_T23=t_T23,
        eps=eps,
        n_r=n_r,
        **_COMMON,
    )


CZ_OPERATING_POINTS = (-15.0, -10.5)
VALIDATION_SWEEP = (-15.0, -13.0, -11.0, -10.5, -9.0, -8.0, -7.0, -6.0)
VALIDATION_T23 = (0.0, 0.5, 1.0)
