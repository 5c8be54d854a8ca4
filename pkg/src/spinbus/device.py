"""Device parameters, validation, and JSON (de)serialization.

Unit convention, used everywhere in this package: every frequency-like
quantity is an ordinary frequency f = omega / 2pi in GHz, exactly as
quoted in experiment-style parameter tables; times are in ns.  The 2pi
shows up in precisely one place, the propagator's exponent
exp(-i 2pi H t).

Magnetic fields are stored as 3-vectors in GHz.  The Zeeman term is
(1/2) B . S with S the Pauli-convention spin vector, so a dot with
B = (0, 0, b) contributes a spin splitting of exactly b.  With that
convention the qubit frequencies and gradients relate to the stored
fields as

    omega_z = (B1_z + B2_z) / 2        g_x = (B1_x - B2_x) / 4,

so a module quoted as (omega_z, g_x) carries B1 = (2 g_x, 0, omega_z)
and B2 = (-2 g_x, 0, omega_z).

Detuning knob: a sweep value ``eps`` tilts a double well as
eps_1 = -eps/2, eps_2 = +eps/2 (dot 2 lowered for negative eps), for the
DQD and for the first two TQD dots alike.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class DeviceValidationError(ValueError):
    """Raised when device parameters violate a structural invariant."""


def _vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise DeviceValidationError(f"field vector must have 3 components, got {value!r}")
    return v


@dataclass(frozen=True)
class DQDParams:
    """Double-dot module: chemical potentials, tunneling, fields (GHz)."""

    eps_D1: float
    eps_D2: float
    t_D: complex
    B_D1: np.ndarray
    B_D2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B_D1", _vec3(self.B_D1))
        object.__setattr__(self, "B_D2", _vec3(self.B_D2))


@dataclass(frozen=True)
class TQDParams:
    """Triple-dot module: potentials, Coulomb energies, tunnelings, fields."""

    eps_T1: float
    eps_T2: float
    eps_T3: float
    U_T1: float
    U_T2: float
    U_T3: float
    V_T12: float
    V_T23: float
    V_T31: float
    t_T12: complex
    t_T23: complex
    t_T31: complex
    B_T1: np.ndarray
    B_T2: np.ndarray
    B_T3: np.ndarray

    def __post_init__(self):
        for name in ("B_T1", "B_T2", "B_T3"):
            object.__setattr__(self, name, _vec3(getattr(self, name)))


@dataclass(frozen=True)
class DriveSpec:
    """Microwave drive on the DQD potentials: amplitude * cos(2 pi f t).

    The drive acts on (n_D1 - n_D2).  ``t_start``/``duration`` bound a
    rectangular window; ``duration=None`` means always on.
    """

    amplitude: float
    frequency: float
    t_start: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise DeviceValidationError("drive amplitude must be >= 0")
        if self.duration is not None and self.duration <= 0:
            raise DeviceValidationError("drive duration must be > 0")

    def envelope(self, t: float) -> float:
        if t < self.t_start:
            return 0.0
        if self.duration is not None and t > self.t_start + self.duration:
            return 0.0
        return 1.0


@dataclass(frozen=True)
class DeviceParams:
    """Every physical parameter of the full three-spin Hamiltonian.

    ``localization_margin`` scales the validity check that pins one TQD
    electron in dot T3: eps_T3 must sit below the mobile-electron
    configurations, and both far below the on-site Coulomb scales.
    """

    omega_r: float
    dqd: DQDParams
    tqd: TQDParams
    g_D_AC: float
    g_T_AC: float
    n_r: int = 3
    localization_margin: float = 10.0
    allow_t31: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        tqd = self.tqd
        if self.n_r < 1:
            raise DeviceValidationError("n_r must be >= 1")
        for name in ("U_T1", "U_T2", "U_T3", "V_T12", "V_T23", "V_T31"):
            if getattr(tqd, name) < 0:
                raise DeviceValidationError(f"{name} must be >= 0")
        if tqd.t_T31 != 0 and not self.allow_t31:
            raise DeviceValidationError(
                "linear-array condition t_T31 = 0 violated; "
                "set allow_t31=True to override"
            )
        m = self.localization_margin
        gap1 = tqd.eps_T2 + tqd.V_T12 - tqd.V_T31 - tqd.eps_T3
        gap2 = tqd.eps_T1 + tqd.V_T12 - tqd.V_T23 - tqd.eps_T3
        scale = max(
            abs(tqd.t_T12),
            abs(tqd.t_T23),
            abs(tqd.t_T31),
            abs(self.dqd.t_D),
            abs(tqd.eps_T1 - tqd.eps_T2),
            self.zeeman_feature(),
            self.omega_r,
        )
        if gap1 < m * scale or gap2 < m * scale:
            raise DeviceValidationError(
                "localization condition violated: eps_T3 must lie at least "
                f"{m}x the module energy scale below the mobile configurations "
                f"(gaps {gap1:.3g}, {gap2:.3g} GHz vs scale {scale:.3g} GHz)"
            )
        for name in ("U_T1", "U_T2", "U_T3"):
            if getattr(tqd, name) - max(gap1, gap2) < m * scale:
                raise DeviceValidationError(
                    f"localization condition violated: {name} must exceed the "
                    "charge gaps by the margin"
                )

    # -- derived conveniences -------------------------------------------------

    def zeeman_feature(self) -> float:
        """Largest Zeeman splitting (GHz), used for step-size checks."""
        fields = [self.dqd.B_D1, self.dqd.B_D2, self.tqd.B_T1, self.tqd.B_T2, self.tqd.B_T3]
        return max(float(np.linalg.norm(b)) for b in fields)

    def with_detuning(self, eps: float, eps_D: float | None = None) -> "DeviceParams":
        """Tilt both double wells by the sweep knob ``eps`` (GHz).

        Dot 1 is raised and dot 2 lowered for negative ``eps``:
        eps_1 = -eps/2, eps_2 = +eps/2.  ``eps_D`` overrides the DQD tilt
        separately when given.
        """
        if eps_D is None:
            eps_D = eps
        dqd = replace(self.dqd, eps_D1=-eps_D / 2.0, eps_D2=+eps_D / 2.0)
        tqd = replace(self.tqd, eps_T1=-eps / 2.0, eps_T2=+eps / 2.0)
        return replace(self, dqd=dqd, tqd=tqd)

    def with_t23(self, t_T23: complex) -> "DeviceParams":
        return replace(self, tqd=replace(self.tqd, t_T23=t_T23))


def make_device(
    omega_r: float,
    omega_D_z: float,
    omega_T_z: float,
    omega_3_z: float,
    g_D_x: float,
    g_T_x: float,
    t_D: complex,
    t_T12: complex,
    t_T23: complex,
    g_D_AC: float,
    g_T_AC: float,
    eps_T3: float,
    U_T: float,
    V_T12: float = 0.0,
    V_T23: float = 0.0,
    V_T31: float = 0.0,
    eps: float = 0.0,
    t_T31: complex = 0.0,
    n_r: int = 3,
    B_3: Sequence[float] | None = None,
    **kwargs,
) -> DeviceParams:
    """Build a DeviceParams from experiment-style quantities.

    ``omega_*_z`` are the z-field strengths (qubit Zeeman splittings) and
    ``g_*_x`` the transverse gradient couplings, all in GHz; ``eps`` is
    the shared detuning knob.  ``B_3`` optionally replaces the default
    z-directed field on dot T3.
    """
    dqd = DQDParams(
        eps_D1=-eps / 2.0,
        eps_D2=+eps / 2.0,
        t_D=t_D,
        B_D1=(2 * g_D_x, 0.0, omega_D_z),
        B_D2=(-2 * g_D_x, 0.0, omega_D_z),
    )
    tqd = TQDParams(
        eps_T1=-eps / 2.0,
        eps_T2=+eps / 2.0,
        eps_T3=eps_T3,
        U_T1=U_T,
        U_T2=U_T,
        U_T3=U_T,
        V_T12=V_T12,
        V_T23=V_T23,
        V_T31=V_T31,
        t_T12=t_T12,
        t_T23=t_T23,
        t_T31=t_T31,
        B_T1=(2 * g_T_x, 0.0, omega_T_z),
        B_T2=(-2 * g_T_x, 0.0, omega_T_z),
        B_T3=(0.0, 0.0, omega_3_z) if B_3 is None else tuple(B_3),
    )
    return DeviceParams(
        omega_r=omega_r,
        dqd=dqd,
        tqd=tqd,
        g_D_AC=g_D_AC,
        g_T_AC=g_T_AC,
        n_r=n_r,
        **kwargs,
    )


# -- JSON round trip ----------------------------------------------------------

def _complex_out(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _complex_in(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def device_to_dict(p: DeviceParams) -> dict:
    """JSON-ready dictionary; all frequencies in GHz, see module docstring."""
    return {
        "omega_r_GHz": p.omega_r,
        "n_r": p.n_r,
        "g_D_AC_GHz": p.g_D_AC,
        "g_T_AC_GHz": p.g_T_AC,
        "localization_margin": p.localization_margin,
        "allow_t31": p.allow_t31,
        "dqd": {
            "eps_D1_GHz": p.dqd.eps_D1,
            "eps_D2_GHz": p.dqd.eps_D2,
            "t_D_GHz": _complex_out(p.dqd.t_D),
            "B_D1_GHz": list(p.dqd.B_D1),
            "B_D2_GHz": list(p.dqd.B_D2),
        },
        "tqd": {
            "eps_T1_GHz": p.tqd.eps_T1,
            "eps_T2_GHz": p.tqd.eps_T2,
            "eps_T3_GHz": p.tqd.eps_T3,
            "U_T1_GHz": p.tqd.U_T1,
            "U_T2_GHz": p.tqd.U_T2,
            "U_T3_GHz": p.tqd.U_T3,
            "V_T12_GHz": p.tqd.V_T12,
            "V_T23_GHz": p.tqd.V_T23,
            "V_T31_GHz": p.tqd.V_T31,
            "t_T12_GHz": _complex_out(p.tqd.t_T12),
            "t_T23_GHz": _complex_out(p.tqd.t_T23),
            "t_T31_GHz": _complex_out(p.tqd.t_T31),
            "B_T1_GHz": list(p.tqd.B_T1),
            "B_T2_GHz": list(p.tqd.B_T2),
            "B_T3_GHz": list(p.tqd.B_T3),
        },
    }


def device_from_dict(d: dict) -> DeviceParams:
    try:
        dqd = DQDParams(
            eps_D1=float(d["dqd"]["eps_D1_GHz"]),
            eps_D2=float(d["dqd"]["eps_D2_GHz"]),
            t_D=_complex_in(d["dqd"]["t_D_GHz"]),
            B_D1=d["dqd"]["B_D1_GHz"],
            B_D2=d["dqd"]["B_D2_GHz"],
        )
        t = d["tqd"]
        tqd = TQDParams(
            eps_T1=float(t["eps_T1_GHz"]),
            eps_T2=float(t["eps_T2_GHz"]),
            eps_T3=float(t["eps_T3_GHz"]),
            U_T1=float(t["U_T1_GHz"]),
            U_T2=float(t["U_T2_GHz"]),
            U_T3=float(t["U_T3_GHz"]),
            V_T12=float(t["V_T12_GHz"]),
            V_T23=float(t["V_T23_GHz"]),
            V_T31=float(t["V_T31_GHz"]),
            t_T12=_complex_in(t["t_T12_GHz"]),
            t_T23=_complex_in(t["t_T23_GHz"]),
            t_T31=_complex_in(t["t_T31_GHz"]),
            B_T1=t["B_T1_GHz"],
            B_T2=t["B_T2_GHz"],
            B_T3=t["B_T3_GHz"],
        )
        return DeviceParams(
            omega_r=float(d["omega_r_GHz"]),
            dqd=dqd,
            tqd=tqd,
            g_D_AC=float(d["g_D_AC_GHz"]),
            g_T_AC=float(d["g_T_AC_GHz"]),
            n_r=int(d["n_r"]),
            localization_margin=float(d.get("localization_margin", 10.0)),
            allow_t31=bool(d.get("allow_t31", False)),
        )
    except KeyError as exc:
        raise DeviceValidationError(f"missing device key: {exc}") from exc


def device_to_json(p: DeviceParams, **kwargs) -> str:
    return json.dumps(device_to_dict(p), indent=2, **kwargs)


def device_from_json(s: str) -> DeviceParams:
    return device_from_dict(json.loads(s))
