"""Quasistatic charge-noise Monte Carlo over the cross-resonance CNOT.

Each sample draws independent Gaussian shifts for the electrically
controlled parameters: the five dot potentials with standard deviation
sigma_eps and the three tunnel couplings with sigma_eps / 200 (tunnel
couplings respond to gate voltages with a lever arm roughly two orders
of magnitude smaller than detunings).  Noise is frozen during a gate:
every sample is one full simulation at the baseline-optimal gate time
with the baseline calibration, re-optimized only over virtual-Z phases.

Draws are counter-based: parameter k of sample j at noise point i is a
pure function of (seed, i, j, k), so parallel execution order cannot
change results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .device import DeviceParams, DeviceValidationError
from .gates import CNOTProtocol, CNOTSettings, build_cnot_protocol, evaluate_cnot_at, run_cnot_cr

TUNNEL_RATIO = 200.0

NOISE_PARAMS = (
    "eps_D1",
    "eps_D2",
    "eps_T1",
    "eps_T2",
    "eps_T3",
    "t_D",
    "t_T12",
    "t_T23",
)


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian quasistatic noise: detuning scale, fixed tunnel ratio."""

    sigma_eps: float
    n_samples: int = 100
    seed: int = 0
    tunnel_ratio: float = TUNNEL_RATIO
    max_resample: int = 16

    def __post_init__(self):
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def sigma_t(self) -> float:
        return self.sigma_eps / self.tunnel_ratio


def _draw(seed: int, sigma_index: int, sample: int, param: int) -> float:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(sigma_index, sample, param))
    )
    return float(rng.standard_normal())


def sample_device(
    params: DeviceParams,
    spec: NoiseSpec,
    k: int,
    sigma_index: int = 0,
) -> tuple[DeviceParams, int]:
    """Independent Gaussian perturbation of sample ``k``.

    Returns the perturbed device and the number of resamples needed to
    satisfy the structural invariants (0 in practice).
    """
    if spec.sigma_eps == 0:
        return params, 0
    resamples = 0
    for attempt in range(spec.max_resample + 1):
        offset = 1000 * attempt
        deltas = {
            name: _draw(spec.seed, sigma_index, k, offset + i)
            * (spec.sigma_eps if name.startswith("eps") else spec.sigma_t)
            for i, name in enumerate(NOISE_PARAMS)
        }
        dqd = replace(
            params.dqd,
            eps_D1=params.dqd.eps_D1 + deltas["eps_D1"],
            eps_D2=params.dqd.eps_D2 + deltas["eps_D2"],
            t_D=params.dqd.t_D + deltas["t_D"],
        )
        tqd = replace(
            params.tqd,
            eps_T1=params.tqd.eps_T1 + deltas["eps_T1"],
            eps_T2=params.tqd.eps_T2 + deltas["eps_T2"],
            eps_T3=params.tqd.eps_T3 + deltas["eps_T3"],
            t_T12=params.tqd.t_T12 + deltas["t_T12"],
            t_T23=params.tqd.t_T23 + deltas["t_T23"],
        )
        try:
            return replace(params, dqd=dqd, tqd=tqd), resamples
        except DeviceValidationError:
            resamples += 1
    raise DeviceValidationError(
        f"sample {k}: could not satisfy device invariants after "
        f"{spec.max_resample} resamples"
    )


@dataclass
class NoisePointResult:
    sigma_eps: float
    mean_infidelity: float
    std_infidelity: float
    infidelities: np.ndarray
    n_ok: int
    n_failed: int
    n_resampled: int


@dataclass
class NoiseSweepResult:
    baseline_infidelity: float
    t_g: float
    points: list = field(default_factory=list)

    def monotone_trend(self) -> bool:
        means = [p.mean_infidelity for p in self.points]
        return bool(np.all(np.diff(means) >= -1e-12))


def _limit_worker_threads():
    """Keep pooled workers single-threaded in BLAS (cores are already
    saturated by the process pool)."""
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=1)
    except Exception:
        pass


def _one_sample(args):
    proto, params, spec, k, sigma_index, t_g, dt = args
    _limit_worker_threads()
    try:
        dev, resamples = sample_device(params, spec, k, sigma_index)
        fid, _ = evaluate_cnot_at(proto, dev, t_g, dt=dt)
        return (k, 1.0 - fid, resamples, None)
    except Exception as exc:  # recorded, excluded from the statistics
        return (k, np.nan, 0, repr(exc))


def noise_sweep(
    params: DeviceParams,
    cnot_settings: CNOTSettings,
    sigmas,
    spec: NoiseSpec,
    workers: int = 1,
    baseline: "object | None" = None,
    dt: float = 0.001,
) -> NoiseSweepResult:
    """Mean/std CNOT infidelity versus noise amplitude.

    The gate time is frozen at the baseline (noiseless) optimum; the
    calibration (drive, frames, logical subspace) is the baseline one.
    """
    if baseline is None:
        baseline = run_cnot_cr(params, cnot_settings)
    t_g = baseline.t_peak
    proto = build_cnot_protocol(params, cnot_settings)
    result = NoiseSweepResult(
        baseline_infidelity=float(1.0 - baseline.peak_fidelity), t_g=t_g
    )
    for i, sigma in enumerate(sigmas):
        pt_spec = replace(spec, sigma_eps=float(sigma))
        jobs = [
            (proto, params, pt_spec, k, i, t_g, dt) for k in range(spec.n_samples)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_one_sample, jobs, chunksize=4))
        else:
            rows = [_one_sample(j) for j in jobs]
        rows.sort(key=lambda r: r[0])  # deterministic reduction order
        infs = np.array([r[1] for r in rows])
        ok = np.isfinite(infs)
        point = NoisePointResult(
            sigma_eps=float(sigma),
            mean_infidelity=float(np.mean(infs[ok])) if ok.any() else np.nan,
            std_infidelity=float(np.std(infs[ok], ddof=1)) if ok.sum() > 1 else 0.0,
            infidelities=infs,
            n_ok=int(ok.sum()),
            n_failed=int((~ok).sum()),
            n_resampled=int(sum(r[2] for r in rows)),
        )
        result.points.append(point)
    return result
