"""Experiment orchestration: dispatch, artifact files, run manifest.

Artifacts are CSV (traces, sweeps) and JSON (settings echoes and summary
scalars); file names encode the protocol and operating point.  Every run
writes a ``manifest.json`` listing the configuration snapshot, the
artifact files with SHA-256 checksums, and wall-clock timings; the
manifest is written atomically after all artifacts so a complete
manifest implies a complete run.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .device import DeviceParams
from .fitting import FitSpec, fit_effective
from .gates import (
    CNOTSettings,
    CZSettings,
    drive_frequency_robustness,
    run_cnot_cr,
    run_cz,
)
from .noise import NoiseSpec, noise_sweep
from .metrics import unitarity  # noqa: F401  (re-exported for run scripts)
from .pulses import FilterSpec, cz_pulse, spectrum_table


class ExperimentError(RuntimeError):
    """Numerical or dispatch failure while executing an experiment."""


@dataclass
class RunManifest:
    config: dict
    artifacts: dict = field(default_factory=dict)  # path -> sha256
    timings: dict = field(default_factory=dict)
    version: str = __version__
    status: str = "complete"

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "status": self.status,
            "config": self.config,
            "artifacts": self.artifacts,
            "timings_s": self.timings,
        }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _gate_trace_rows(result):
    for t, f, u in zip(result.times, result.fidelity, result.unitarity):
        yield (t, f, 1.0 - f, u)


def _gate_summary(result) -> dict:
    return {
        "protocol": result.protocol,
        "target": result.target,
        "t_g_ns": result.t_g,
        "t_peak_ns": result.t_peak,
        "peak_fidelity": result.peak_fidelity,
        "max_infidelity_after_pulse": result.max_infidelity_after_pulse,
        "unitarity_min": result.unitarity_min,
        "settings": result.settings,
        "predicted": result.predicted,
    }


# -- experiment implementations ------------------------------------------------

def _fit_point(args):
    from .noise import _limit_worker_threads

    dev, eps, t23, t0, n_samples = args
    _limit_worker_threads()
    res = fit_effective(
        dev.with_detuning(eps).with_t23(t23), FitSpec(t0=t0, n_samples=n_samples)
    )
    return eps, t23, res


def _run_fit_effective(cfg: RunConfig, out: Path) -> dict:
    from .presets import VALIDATION_SWEEP, VALIDATION_T23

    s = cfg.settings
    detunings = s.get("detunings", list(VALIDATION_SWEEP))
    t23s = s.get("t_T23_values", list(VALIDATION_T23))
    t0 = float(s.get("t0_ns", 20000.0))
    n_samples = int(s.get("n_samples", 50))
    jobs = [(cfg.device, float(e), float(t), t0, n_samples) for t in t23s for e in detunings]
    workers = min(cfg.resolved_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_point, jobs, chunksize=1))
    else:
        results = [_fit_point(j) for j in jobs]
    header = ["detuning_GHz", "t_T23_GHz"]
    names = ["omega_D_GHz", "omega_T_GHz", "omega_3_GHz", "J_r_GHz", "J_e_GHz", "J_ZZ_GHz"]
    header += [f"{n}_fit" for n in names] + [f"{n}_analytic" for n in names]
    header += ["fit_fidelity"]
    rows = []
    for eps, t23, res in results:
        rows.append(
            (eps, t23, *res.fitted.as_vector(), *res.analytic.as_vector(), res.mean_fidelity)
        )
    path = out / "fit_effective_sweep.csv"
    write_csv(path, header, rows)
    worst = min(r[2].mean_fidelity for r in results)
    write_json(
        out / "fit_effective_summary.json",
        {
            "n_points": len(results),
            "worst_fit_fidelity": worst,
            "max_abs_J_ZZ_GHz": max(abs(r[2].fitted.J_ZZ) for r in results),
            "t0_ns": t0,
            "n_samples": n_samples,
        },
    )
    return {"worst_fit_fidelity": worst}


def _cz_settings_from(cfg: RunConfig, shape: str, t_g: float, filt) -> CZSettings:
    s = cfg.settings
    pulse = cz_pulse(shape, t_g, n=int(s.get("n", 0)), filter=filt)
    kwargs = {}
    if cfg.dt_ns:
        kwargs["dt"] = cfg.dt_ns
    if "window_factor" in s:
        kwargs["window_factor"] = float(s["window_factor"])
    if "trace_dt_ns" in s:
        kwargs["trace_dt"] = float(s["trace_dt_ns"])
    return CZSettings(pulse=pulse, eps=float(s.get("eps_GHz", -15.0)), n=int(s.get("n", 0)), **kwargs)


def _filter_from(spec) -> FilterSpec | None:
    if not spec:
        return None
    if spec is True:
        return FilterSpec()
    return FilterSpec(order=int(spec.get("order", 6)), cutoff=float(spec.get("cutoff_GHz", 0.1)))


def _cz_file_tag(shape: str, t_g: float, eps: float, filtered: bool) -> str:
    tag = f"cz_{shape}{'_filtered' if filtered else ''}_tg{t_g:g}ns_eps{eps:g}"
    return tag.replace("-", "m")


def _run_cz(cfg: RunConfig, out: Path) -> dict:
    s = cfg.settings
    shape = s.get("shape", "hann")
    filt = _filter_from(s.get("filter"))
    t_g = float(s.get("t_g_ns", 100.0))
    settings = _cz_settings_from(cfg, shape, t_g, filt)
    res = run_cz(cfg.device, settings)
    tag = _cz_file_tag(shape, t_g, settings.eps, filt is not None)
    write_csv(out / f"{tag}.csv", ["time_ns", "fidelity", "infidelity", "unitarity"], _gate_trace_rows(res))
    wf = res.waveform
    write_csv(
        out / f"{tag}_waveform.csv",
        ["t_ns", "J_e_MHz", "t_T23_GHz"],
        zip(wf.times, 1e3 * wf.J_e_target, wf.t23),
    )
    write_json(out / f"{tag}_summary.json", _gate_summary(res))
    return {"max_infidelity_after_pulse": res.max_infidelity_after_pulse}


def _run_cz_compare(cfg: RunConfig, out: Path) -> dict:
    s = cfg.settings
    shapes = s.get("shapes", ["hann", "rect", "rect+filter"])
    t_g = float(s.get("t_g_ns", 52.984))
    eps = float(s.get("eps_GHz", -15.0))
    summary = {}
    for shape in shapes:
        base = shape.split("+")[0]
        filt = _filter_from(True if shape.endswith("+filter") else s.get("filter"))
        settings = _cz_settings_from(cfg, base, t_g, filt)
        settings = replace(settings, eps=eps)
        res = run_cz(cfg.device, settings)
        tag = _cz_file_tag(base, t_g, eps, filt is not None)
        write_csv(out / f"{tag}.csv", ["time_ns", "fidelity", "infidelity", "unitarity"], _gate_trace_rows(res))
        write_json(out / f"{tag}_summary.json", _gate_summary(res))
        summary[shape] = res.max_infidelity_after_pulse
    write_json(out / "cz_compare_summary.json", {"t_g_ns": t_g, "eps_GHz": eps, "max_infidelity_after_pulse": summary})
    return {"max_infidelity_after_pulse": summary}


def _cnot_settings_from(cfg: RunConfig) -> CNOTSettings:
    s = cfg.settings
    kwargs = {}
    if "Omega_eff_x_GHz" in s:
        kwargs["Omega_eff_x"] = float(s["Omega_eff_x_GHz"])
    if "omega_d_GHz" in s and s["omega_d_GHz"] is not None:
        kwargs["omega_d"] = float(s["omega_d_GHz"])
    if "window_ns" in s:
        kwargs["window"] = float(s["window_ns"])
    if "calibration" in s:
        kwargs["calibration"] = str(s["calibration"])
    if cfg.dt_ns:
        kwargs["dt"] = cfg.dt_ns
    return CNOTSettings(**kwargs)


def _run_cnot(cfg: RunConfig, out: Path) -> dict:
    res = run_cnot_cr(cfg.device, _cnot_settings_from(cfg))
    t23 = float(np.real(cfg.device.tqd.t_T23))
    tag = f"cnot_t23_{t23:g}".replace("-", "m").replace(".", "p")
    write_csv(out / f"{tag}.csv", ["time_ns", "fidelity", "infidelity", "unitarity"], _gate_trace_rows(res))
    write_json(out / f"{tag}_summary.json", _gate_summary(res))
    return {"max_fidelity": res.peak_fidelity, "t_g_ns": res.t_peak}


def _run_cnot_robustness(cfg: RunConfig, out: Path) -> dict:
    s = cfg.settings
    offsets = s.get(
        "omega_d_offsets_MHz", [-15, -10, -6, -3, -1, 0, 1, 3, 6, 10, 15]
    )
    settings = _cnot_settings_from(cfg)
    from .effective import effective_chain
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")
        _, _, eff = effective_chain(cfg.device)
    grid = [eff.omega_T + 1e-3 * float(o) for o in offsets]
    curve = drive_frequency_robustness(cfg.device, settings, grid)
    write_csv(
        out / "cnot_robustness.csv",
        ["omega_d_GHz", "best_fidelity", "best_t_g_ns"],
        [(c["omega_d_GHz"], c["best_fidelity"], c["best_t_g_ns"]) for c in curve],
    )
    best = max(curve, key=lambda c: c["best_fidelity"])
    write_json(
        out / "cnot_robustness_summary.json",
        {"omega_T_GHz": eff.omega_T, "peak": best, "offsets_MHz": list(offsets)},
    )
    return {"peak_omega_d_GHz": best["omega_d_GHz"]}


def _run_noise_sweep(cfg: RunConfig, out: Path) -> dict:
    s = cfg.settings
    sigmas = s.get("sigmas_GHz", [0.01, 0.05, 0.1, 0.3, 1.0])
    n_samples = int(s.get("n_samples", 100))
    t23s = s.get("t_T23_values", [0.0, 0.8])
    settings = _cnot_settings_from(cfg)
    rows = []
    summary = {}
    for t23 in t23s:
        dev = cfg.device.with_t23(float(t23))
        spec = NoiseSpec(sigma_eps=0.0, n_samples=n_samples, seed=cfg.seed)
        sweep = noise_sweep(
            dev,
            settings,
            sigmas,
            spec,
            workers=cfg.resolved_workers(),
            dt=cfg.dt_ns or 0.001,
        )
        for pt in sweep.points:
            rows.append(
                (
                    float(t23),
                    pt.sigma_eps,
                    pt.mean_infidelity,
                    pt.std_infidelity,
                    pt.n_ok,
                    pt.n_failed,
                )
            )
        summary[f"t23_{t23:g}"] = {
            "baseline_infidelity": sweep.baseline_infidelity,
            "t_g_ns": sweep.t_g,
        }
    write_csv(
        out / "noise_sweep.csv",
        ["t_T23_GHz", "sigma_GHz", "mean_infidelity", "std_infidelity", "n_ok", "n_failed"],
        rows,
    )
    write_json(
        out / "noise_sweep_summary.json",
        {"seed": cfg.seed, "n_samples": n_samples, "baselines": summary},
    )
    return {"n_points": len(rows)}


def _run_pulse_spectrum(cfg: RunConfig, out: Path) -> dict:
    s = cfg.settings
    x_max = float(s.get("x_max", 20.0))
    n = int(s.get("n_points", 2001))
    table = spectrum_table(np.linspace(1e-4, x_max, n))
    write_csv(
        out / "pulse_spectrum.csv",
        ["tg_wq_over_2pi", "Pe_rect", "Pe_hann"],
        zip(table["tg_wq_over_2pi"], table["Pe_rect"], table["Pe_hann"]),
    )
    return {"n_points": n}


_DISPATCH = {
    "fit-effective": _run_fit_effective,
    "cz": _run_cz,
    "cz-compare": _run_cz_compare,
    "cnot": _run_cnot,
    "cnot-robustness": _run_cnot_robustness,
    "noise-sweep": _run_noise_sweep,
    "pulse-spectrum": _run_pulse_spectrum,
}


def run(config: RunConfig) -> RunManifest:
    """Execute one experiment and persist its artifacts plus manifest."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config.to_dict())
    t0 = time.time()
    before = {p.name for p in out.iterdir()}
    try:
        summary = _DISPATCH[config.experiment](config, out)
    except Exception as exc:
        manifest.status = f"failed: {exc!r}"
        _write_manifest(out, manifest)
        raise ExperimentError(str(exc)) from exc
    manifest.timings["experiment"] = time.time() - t0
    new_files = sorted(
        p for p in out.iterdir() if p.name not in before and p.name != "manifest.json"
    )
    for p in new_files:
        manifest.artifacts[p.name] = _sha256(p)
    manifest.timings["total"] = time.time() - t0
    manifest.config["result_summary"] = summary
    _write_manifest(out, manifest)
    return manifest


def _write_manifest(out: Path, manifest: RunManifest) -> None:
    tmp = out / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, out / "manifest.json")


def check_manifest(out_dir) -> list[str]:
    """Re-verify artifact checksums; returns a list of problems (empty = ok)."""
    out = Path(out_dir)
    problems = []
    mpath = out / "manifest.json"
    if not mpath.exists():
        return [f"no manifest in {out}"]
    manifest = json.loads(mpath.read_text())
    for name, digest in manifest.get("artifacts", {}).items():
        p = out / name
        if not p.exists():
            problems.append(f"missing artifact: {name}")
        elif _sha256(p) != digest:
            problems.append(f"checksum mismatch: {name}")
    return problems
