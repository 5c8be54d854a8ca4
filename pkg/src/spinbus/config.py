"""Run configuration: JSON schema, validation, defaults.

A run configuration selects exactly one experiment, provides the device
(either inline or through a named preset), and optionally overrides the
experiment's settings.  Frequencies carry an explicit _GHz suffix in key
names (they are ordinary frequencies, omega / 2 pi), times _ns.

Top-level keys::

    experiment   one of the EXPERIMENTS set (required)
    device       preset name or full device dictionary (required)
    settings     experiment-specific block (optional)
    out_dir      artifact directory (default "runs")
    seed         integer RNG seed (default 0)
    workers      parallel workers (default: available cores)
    n_r          resonator truncation override
    dt_ns        integrator step override

Unknown keys anywhere are rejected with their full path.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .device import DeviceParams, device_from_dict, device_to_dict
from . import presets

EXPERIMENTS = (
    "fit-effective",
    "cz",
    "cz-compare",
    "cnot",
    "cnot-robustness",
    "noise-sweep",
    "pulse-spectrum",
)

FIGURE_ALIASES = {
    "fig2": "fit-effective",
    "fig3a": "cz",
    "fig3c": "cz-compare",
    "fig3d": "cz-compare",
    "fig3e": "pulse-spectrum",
    "fig4a": "cnot",
    "fig4b": "cnot-robustness",
    "fig5": "noise-sweep",
}

_SETTING_KEYS = {
    "fit-effective": {
        "detunings",
        "t_T23_values",
        "t0_ns",
        "n_samples",
    },
    "cz": {"shape", "t_g_ns", "eps_GHz", "n", "filter", "window_factor", "trace_dt_ns"},
    "cz-compare": {"shapes", "t_g_ns", "eps_GHz", "n", "filter"},
    "cnot": {"Omega_eff_x_GHz", "omega_d_GHz", "window_ns", "calibration"},
    "cnot-robustness": {
        "Omega_eff_x_GHz",
        "omega_d_offsets_MHz",
        "calibration",
    },
    "noise-sweep": {
        "sigmas_GHz",
        "n_samples",
        "t_T23_values",
        "Omega_eff_x_GHz",
        "calibration",
    },
    "pulse-spectrum": {"x_max", "n_points"},
}


class ConfigError(ValueError):
    """Configuration file rejected; message carries the key path."""


@dataclass
class RunConfig:
    experiment: str
    device: DeviceParams
    settings: dict = field(default_factory=dict)
    out_dir: str = "runs"
    seed: int = 0
    workers: int = 0
    dt_ns: float | None = None
    device_spec: dict = field(default_factory=dict, repr=False)

    def resolved_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        return max(os.cpu_count() or 1, 1)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "device": self.device_spec or device_to_dict(self.device),
            "settings": self.settings,
            "out_dir": self.out_dir,
            "seed": self.seed,
            "workers": self.workers,
            **({"dt_ns": self.dt_ns} if self.dt_ns is not None else {}),
        }


_PRESETS = {
    "validation": presets.validation_device,
    "gate": presets.gate_device,
}


def _reject_unknown(block: dict, allowed, path: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def _build_device(spec, n_r_override) -> tuple[DeviceParams, dict]:
    if isinstance(spec, str):
        name, _, arg = spec.partition(":")
        if name not in _PRESETS:
            raise ConfigError(
                f"device: unknown preset {name!r} (have {sorted(_PRESETS)})"
            )
        kwargs = {}
        if arg:
            try:
                kwargs["eps"] = float(arg)
            except ValueError as exc:
                raise ConfigError(f"device: bad preset argument {arg!r}") from exc
        if n_r_override:
            kwargs["n_r"] = int(n_r_override)
        return _PRESETS[name](**kwargs), {"preset": spec}
    if not isinstance(spec, dict):
        raise ConfigError("device: must be a preset name or a parameter object")
    if "preset" in spec:
        rest = {k: v for k, v in spec.items() if k != "preset"}
        name, _, _ = spec["preset"].partition(":")
        if name not in _PRESETS:
            raise ConfigError(f"device.preset: unknown preset {spec['preset']!r}")
        allowed = {"eps", "t_T23", "n_r"}
        _reject_unknown(rest, allowed, "device.")
        kwargs = dict(rest)
        if n_r_override:
            kwargs["n_r"] = int(n_r_override)
        return _PRESETS[name](**kwargs), dict(spec)
    # full inline device dictionary
    try:
        dev = device_from_dict(spec)
    except KeyError as exc:
        raise ConfigError(f"device: missing key {exc}") from exc
    for key in spec:
        if key not in {
            "omega_r_GHz",
            "n_r",
            "g_D_AC_GHz",
            "g_T_AC_GHz",
            "localization_margin",
            "allow_t31",
            "dqd",
            "tqd",
        }:
            raise ConfigError(f"unknown key device.{key!r}")
    if n_r_override:
        from dataclasses import replace

        dev = replace(dev, n_r=int(n_r_override))
    return dev, dict(spec)


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    allowed = {
        "experiment",
        "device",
        "settings",
        "out_dir",
        "seed",
        "workers",
        "n_r",
        "dt_ns",
    }
    _reject_unknown(data, allowed, "")
    exp = data.get("experiment")
    if exp in FIGURE_ALIASES:
        exp = FIGURE_ALIASES[exp]
    if exp not in EXPERIMENTS:
        raise ConfigError(
            f"experiment: expected one of {sorted(EXPERIMENTS)} "
            f"or aliases {sorted(FIGURE_ALIASES)}, got {data.get('experiment')!r}"
        )
    if "device" not in data:
        raise ConfigError("device: required")
    n_r = data.get("n_r")
    if n_r is not None and (not isinstance(n_r, int) or n_r < 1):
        raise ConfigError(f"n_r: must be an integer >= 1, got {n_r!r}")
    try:
        device, device_spec = _build_device(data["device"], n_r)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"device: {exc}") from exc
    settings = data.get("settings", {})
    if not isinstance(settings, dict):
        raise ConfigError("settings: must be an object")
    _reject_unknown(settings, _SETTING_KEYS[exp], "settings.")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed: must be an integer, got {seed!r}")
    workers = data.get("workers", 0)
    if not isinstance(workers, int) or workers < 0:
        raise ConfigError(f"workers: must be a non-negative integer, got {workers!r}")
    dt = data.get("dt_ns")
    if dt is not None and not (isinstance(dt, (int, float)) and dt > 0):
        raise ConfigError(f"dt_ns: must be a positive number, got {dt!r}")
    return RunConfig(
        experiment=exp,
        device=device,
        settings=dict(settings),
        out_dir=str(data.get("out_dir", "runs")),
        seed=seed,
        workers=workers,
        dt_ns=float(dt) if dt is not None else None,
        device_spec=device_spec if isinstance(data["device"], (str, dict)) else {},
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return parse_config(data)
