"""spinbus: simulator for a resonator-coupled three-spin quantum-dot device.

A double dot (one electron) and a triple dot (two electrons) sit at the
two ends of a microwave resonator.  The package builds the full
Fermi-Hubbard + cavity Hamiltonian on the fixed-charge sector, derives
and validates the dressed three-qubit effective model, and simulates
short-range conditional-phase and long-range cross-resonance entangling
gates including pulse engineering and quasistatic charge noise.

Units: ordinary frequencies (omega / 2 pi) in GHz, times in ns.
"""

__version__ = "0.1.0"

from .basis import BasisIndex, OperatorSet, build_basis, build_operators
from .device import DeviceParams, DriveSpec, device_from_json, device_to_json, make_device
from .effective import (
    EffectiveParams,
    PauliFrameParams,
    TransformAngles,
    build_effective_hamiltonian,
    dressed_projector,
    effective_chain,
    effective_params,
    pauli_frame,
    transform_angles,
)
from .fitting import FitResult, FitSpec, detuning_sweep, fit_effective
from .gates import (
    CNOTSettings,
    CZSettings,
    GateResult,
    drive_frequency_robustness,
    residual_exchange,
    run_cnot_cr,
    run_cz,
    run_cz_comparison,
)
from .hamiltonian import TimeDependentHamiltonian, build_static, build_time_dependent, hamiltonian_at
from .metrics import (
    FidelityReport,
    average_gate_fidelity,
    optimize_local,
    process_fidelity,
    transformation_fidelity,
    unitarity,
)
from .noise import NoiseSpec, NoiseSweepResult, noise_sweep, sample_device
from .propagate import EvolutionTrace, project_trace, propagate_static, propagate_timedep
from .pulses import (
    FilterSpec,
    PulseSpec,
    apply_filter,
    cz_pulse,
    invert_exchange_to_tunnel,
    nonadiabatic_error_spectrum,
    sample_exchange_profile,
    sync_gate_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
