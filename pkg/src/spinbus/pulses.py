"""Exchange pulse shapes, filtering, error spectra, and control inversion.

Shapes are defined on the exchange coupling J_e(t): a rectangular pulse
holds J_0/2, the first-order (Hann) window is J_0 * (1 - cos(2 pi t/t_g))/2,
and higher-order Fourier windows J_0 * sum_n lambda_n (1 - cos(2 pi n t/t_g))
generalize it.  All shapes share the time average J_0/2 (coefficients
must satisfy sum lambda_n = 1/2), so the conditional-phase condition
"mean J_e times t_g = (2n+1)/2" gives the same gate time t_g = (2n+1)/J_0
for every shape.

The physical control is the T2-T3 tunnel coupling; the map
t_T23 -> J_e is tabulated from the effective model at the operating
point and inverted monotonically.  Bandwidth limits are modeled by a
causal forward Butterworth filter applied to the tunnel-coupling
waveform (not to J_e).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.signal import butter, lfilter

from .device import DeviceParams
from .effective import effective_chain


class PulseRangeError(ValueError):
    """Target exchange exceeds the reachable tabulated range."""


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass filter on the control waveform.

    ``mode`` selects the discrete-time application: "causal" runs the
    filter forward (physical single-pass response; the waveform builder
    compensates the group delay by playing the pulse early), while
    "zero-phase" runs it forward and backward (a delay-free response,
    the usual idealization of a bandwidth-calibrated control chain).
    """

    order: int = 6
    cutoff: float = 0.1  # GHz
    family: str = "butterworth"
    mode: str = "zero-phase"

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("filter order must be >= 1")
        if self.cutoff <= 0:
            raise ValueError("filter cutoff must be > 0")
        if self.family != "butterworth":
            raise ValueError("only Butterworth filtering is supported")
        if self.mode not in ("causal", "zero-phase"):
            raise ValueError("filter mode must be 'causal' or 'zero-phase'")


@dataclass(frozen=True)
class PulseSpec:
    """Exchange-profile specification.

    ``J_0`` is the peak exchange scale in GHz and ``t_g`` the duration in
    ns; ``shape`` is one of "rect", "hann", or "fourier" (with
    ``coefficients`` the lambda_n list).  ``filter`` optionally applies
    to the derived tunnel-coupling waveform.  ``sample_rate`` (GS/s) sets
    the waveform grid used for filtering.
    """

    shape: str
    J_0: float
    t_g: float
    coefficients: tuple = ()
    filter: FilterSpec | None = None
    sample_rate: float = 10.0

    def __post_init__(self):
        if self.t_g <= 0:
            raise ValueError("pulse duration must be > 0")
        if self.shape not in ("rect", "hann", "fourier"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.shape == "fourier":
            lam = np.asarray(self.coefficients, dtype=float)
            if lam.size == 0:
                raise ValueError("fourier shape needs coefficients")
            if abs(lam.sum() - 0.5) > 1e-9:
                raise ValueError(
                    "fourier coefficients must sum to 1/2 so the pulse "
                    "average stays J_0/2"
                )
            probe = np.linspace(0.0, self.t_g, 2001)
            vals = self._fourier_window(probe, lam)
            if vals.min() < -1e-12:
                raise ValueError("fourier window goes negative")

    def _fourier_window(self, t, lam):
        acc = np.zeros_like(np.asarray(t, dtype=float))
        for n, l in enumerate(lam, start=1):
            acc = acc + l * (1.0 - np.cos(2.0 * np.pi * n * t / self.t_g))
        return acc

    def mean_exchange(self) -> float:
        return 0.5 * self.J_0


def sample_exchange_profile(spec: PulseSpec, t) -> np.ndarray | float:
    """J_e at time(s) ``t`` in GHz; zero outside [0, t_g]."""
    t_arr = np.asarray(t, dtype=float)
    inside = (t_arr >= 0.0) & (t_arr <= spec.t_g)
    if spec.shape == "rect":
        vals = np.where(inside, spec.J_0 / 2.0, 0.0)
    elif spec.shape == "hann":
        window = 0.5 * (1.0 - np.cos(2.0 * np.pi * t_arr / spec.t_g))
        vals = np.where(inside, spec.J_0 * window, 0.0)
    else:
        lam = np.asarray(spec.coefficients, dtype=float)
        vals = np.where(inside, spec.J_0 * spec._fourier_window(t_arr, lam), 0.0)
    if np.isscalar(t):
        return float(vals)
    return vals


def cz_pulse(shape: str, t_g: float, n: int = 0, filter: FilterSpec | None = None) -> PulseSpec:
    """Pulse reaching conditional phase (2n+1) pi at duration ``t_g``."""
    J_0 = (2 * n + 1) / t_g
    return PulseSpec(shape=shape, J_0=J_0, t_g=t_g, filter=filter,
                     coefficients=(0.5,) if shape == "fourier" else ())


# -- non-adiabatic error spectra ----------------------------------------------

def _rect_spectrum(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    out[~small] = (np.sin(np.pi * x[~small]) / (np.pi * x[~small])) ** 2
    out[small] = 1.0
    return out


def _hann_spectrum(x):
    x = np.asarray(x, dtype=float)
    base = _rect_spectrum(x)
    denom = 1.0 - x**2
    out = np.empty_like(x)
    near = np.abs(np.abs(x) - 1.0) < 1e-6
    out[~near] = base[~near] / denom[~near] ** 2
    # removable singularity at |x| = 1: sin^2(pi x) ~ pi^2 (1-|x|)^2 cancels
    # the (1-x^2)^2 zero, leaving 1 / (x^2 (1+|x|)^2) -> 1/4.
    xa = np.abs(x[near])
    out[near] = 1.0 / (xa**2 * (1.0 + xa) ** 2)
    return out


def nonadiabatic_error_spectrum(
    shape: str,
    t_g: float,
    delta_omega: float,
    omega_q_grid,
) -> np.ndarray:
    """Normalized non-adiabatic error versus precession frequency.

    Evaluated at x = t_g * f_q; both shapes are normalized to one at
    x -> 0 so the rectangular and first-order-window curves compare on a
    common scale.  Warns outside the weak-exchange regime.
    """
    mean_j = 0.5 / t_g  # J_0/2 for the phase-matched pulse
    if delta_omega > 0 and mean_j / delta_omega > 0.2:
        warnings.warn(
            "exchange is not small against the qubit splitting; the "
            "spectral error model is marginal",
            stacklevel=2,
        )
    x = np.asarray(omega_q_grid, dtype=float) * t_g
    if shape == "rect":
        return _rect_spectrum(x)
    if shape in ("hann", "fourier"):
        return _hann_spectrum(x)
    raise ValueError(f"unknown shape {shape!r}")


def spectrum_table(x_grid) -> dict[str, np.ndarray]:
    """Normalized error spectra on an x = t_g f_q grid (plot-ready)."""
    x = np.asarray(x_grid, dtype=float)
    return {
        "tg_wq_over_2pi": x,
        "Pe_rect": _rect_spectrum(x),
        "Pe_hann": _hann_spectrum(x),
    }


@dataclass(frozen=True)
class SyncSolution:
    t_g: float
    m: int
    n: int
    mean_exchange: float
    omega_q: float
    cycles: float  # t_g * omega_q, equal to m at the synchronized point


def sync_gate_time(delta_omega: float, m: int, n: int = 0) -> SyncSolution:
    """Synchronized gate time: a spectral zero at the conditional-phase
    condition.

    Closure: the phase condition fixes the mean exchange
    J = (2n+1)/(2 t_g) and synchronization demands t_g * f_q = m with
    f_q = sqrt(J^2 + delta_omega^2); eliminating J gives
    t_g = sqrt(4 m^2 - (2n+1)^2) / (2 delta_omega).
    """
    radicand = 4.0 * m**2 - (2 * n + 1) ** 2
    if radicand <= 0:
        raise ValueError("no synchronized solution: need 4 m^2 > (2n+1)^2")
    if delta_omega <= 0:
        raise ValueError("delta_omega must be positive")
    t_g = np.sqrt(radicand) / (2.0 * delta_omega)
    mean_j = (2 * n + 1) / (2.0 * t_g)
    omega_q = float(np.hypot(mean_j, delta_omega))
    return SyncSolution(
        t_g=float(t_g),
        m=m,
        n=n,
        mean_exchange=float(mean_j),
        omega_q=omega_q,
        cycles=float(t_g * omega_q),
    )


# -- exchange -> tunnel-coupling inversion ------------------------------------

@dataclass
class ExchangeMap:
    """Tabulated, monotone map between t_T23 and the effective J_e."""

    t23_grid: np.ndarray
    J_e_grid: np.ndarray
    forward: PchipInterpolator = field(repr=False)
    inverse: PchipInterpolator = field(repr=False)

    @property
    def J_e_max(self) -> float:
        return float(self.J_e_grid[-1])

    def to_tunnel(self, J_e) -> np.ndarray:
        """Pointwise inverse, Newton-polished on the forward interpolant."""
        J = np.asarray(J_e, dtype=float)
        if np.any(J < -1e-15):
            raise PulseRangeError("target exchange must be non-negative")
        if np.any(J > self.J_e_max * (1 + 1e-12)):
            raise PulseRangeError(
                f"target exchange {J.max():.6g} GHz exceeds the achievable "
                f"maximum {self.J_e_max:.6g} GHz for the tabulated range"
            )
        Jc = np.clip(J, 0.0, self.J_e_max)
        x = np.asarray(self.inverse(Jc), dtype=float)
        deriv = self.forward.derivative()
        lo, hi = self.t23_grid[0], self.t23_grid[-1]
        for _ in range(3):
            x = np.clip(x, lo, hi)
            slope = np.asarray(deriv(x), dtype=float)
            step = np.where(slope > 0, (np.asarray(self.forward(x)) - Jc)
                            / np.where(slope > 0, slope, 1.0), 0.0)
            x = x - step
        return np.clip(x, lo, hi)


def exchange_map(
    params: DeviceParams, t23_max: float = 6.0, n_grid: int = 121
) -> ExchangeMap:
    """Tabulate |J_e|(t_T23) from the effective model at this operating
    point (all other parameters held fixed, t31 = 0 geometry)."""
    grid = np.linspace(0.0, t23_max, n_grid)
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for t23 in grid:
            _, _, eff = effective_chain(params.with_t23(t23))
            vals.append(abs(eff.J_e))
    vals = np.asarray(vals)
    if np.any(np.diff(vals) <= 0):
        keep = np.concatenate(([True], np.diff(vals) > 0))
        grid, vals = grid[keep], vals[keep]
    forward = PchipInterpolator(grid, vals, extrapolate=False)
    inverse = PchipInterpolator(vals, grid, extrapolate=False)
    return ExchangeMap(t23_grid=grid, J_e_grid=vals, forward=forward, inverse=inverse)


def invert_exchange_to_tunnel(
    target_J_e: np.ndarray, params: DeviceParams, t23_max: float = 6.0
) -> np.ndarray:
    """Pointwise tunnel-coupling series realizing a target J_e(t) series."""
    emap = exchange_map(params, t23_max=t23_max)
    return emap.to_tunnel(target_J_e)


def apply_filter(signal: np.ndarray, spec: FilterSpec, sample_rate: float) -> np.ndarray:
    """Discrete Butterworth low-pass (bilinear design); DC gain one.

    Causal mode filters forward only; zero-phase mode uses a
    forward-backward pass.  ``sample_rate`` in GS/s must comfortably
    oversample the cutoff.
    """
    if sample_rate < 20.0 * spec.cutoff:
        raise ValueError(
            f"sample rate {sample_rate} GS/s must be >= 20x the cutoff "
            f"({spec.cutoff} GHz)"
        )
    if spec.cutoff >= 0.5 * sample_rate:
        raise ValueError("cutoff at or above Nyquist: unstable discretization")
    b, a = butter(spec.order, spec.cutoff, btype="low", fs=sample_rate)
    x = np.asarray(signal, dtype=float)
    if spec.mode == "zero-phase":
        from scipy.signal import filtfilt

        return filtfilt(b, a, x)
    return lfilter(b, a, x)


@dataclass
class ControlWaveform:
    """Sampled tunnel-coupling control with its generating exchange target."""

    times: np.ndarray
    t23: np.ndarray
    J_e_target: np.ndarray
    pulse: PulseSpec

    def envelope(self):
        """Interpolating callable t -> t23 (zero beyond the sampled window)."""
        times, vals = self.times, self.t23
        interp = PchipInterpolator(times, vals, extrapolate=False)

        def f(t):
            if t <= times[0]:
                return float(vals[0]) if abs(t - times[0]) < 1e-12 else 0.0
            if t >= times[-1]:
                return float(vals[-1]) if abs(t - times[-1]) < 1e-12 else 0.0
            return float(interp(t))

        return f


def filter_group_delay(spec: FilterSpec, sample_rate: float) -> float:
    """Low-frequency group delay of the discretized filter, in ns."""
    from scipy.signal import group_delay

    b, a = butter(spec.order, spec.cutoff, btype="low", fs=sample_rate)
    _, gd = group_delay((b, a), w=[1e-4], fs=sample_rate)
    return float(gd[0]) / sample_rate


def build_control_waveform(
    pulse: PulseSpec,
    params: DeviceParams,
    t23_max: float = 6.0,
    pad: float = 0.0,
    compensate_delay: bool = True,
) -> ControlWaveform:
    """Sample the exchange target, invert it, and optionally filter it.

    Filtering is causal (forward); the waveform is advanced by the
    filter's low-frequency group delay before filtering (the generator
    plays it early), so the delivered pulse stays centered on its
    nominal window and the conditional-phase condition is met at t_g.
    """
    n = max(int(round(pulse.t_g * pulse.sample_rate)), 16)
    times = np.linspace(0.0, pulse.t_g, n + 1)
    J_target = sample_exchange_profile(pulse, times)
    t23 = invert_exchange_to_tunnel(J_target, params, t23_max=t23_max)
    if pad > 0:
        dtp = times[1] - times[0]
        n_pad = int(np.ceil(pad / dtp))
        tail = times[-1] + dtp * np.arange(1, n_pad + 1)
        times = np.concatenate([times, tail])
        t23 = np.concatenate([t23, np.zeros(n_pad)])
        J_target = np.concatenate([J_target, np.zeros(n_pad)])
    if pulse.filter is not None:
        filtered = apply_filter(t23, pulse.filter, pulse.sample_rate)
        if compensate_delay and pulse.filter.mode == "causal":
            shift = int(round(filter_group_delay(pulse.filter, pulse.sample_rate)
                              * pulse.sample_rate))
            if shift > 0:
                filtered = np.concatenate([filtered[shift:], np.zeros(shift)])
        t23 = filtered
    return ControlWaveform(times=times, t23=t23, J_e_target=J_target, pulse=pulse)
