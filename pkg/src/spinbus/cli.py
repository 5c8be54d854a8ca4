"""Command-line entry point.

Two ways to launch a run: a JSON configuration file

    spinbus run --config run.json [--out DIR] [--seed N] [--workers N]

or one of the bundled experiment aliases, which carry the reference
parameters of the corresponding study:

    spinbus fig2 | fig3a | fig3c | fig3d | fig3e | fig4a | fig4b | fig5

``spinbus check --out DIR`` re-verifies the checksums recorded in a run
manifest.  Environment overrides: SPINBUS_OUT, SPINBUS_SEED.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, load_config, parse_config
from .runner import ExperimentError, check_manifest, run

_ALIAS_CONFIGS = {
    "fig2": {
        "experiment": "fit-effective",
        "device": "validation",
    },
    "fig3a": {
        "experiment": "cz",
        "device": "gate",
        "settings": {"shape": "hann", "t_g_ns": 100.0, "eps_GHz": -15.0},
    },
    "fig3c": {
        "experiment": "cz-compare",
        "device": "gate",
        "settings": {
            "shapes": ["hann", "rect", "rect+filter"],
            "t_g_ns": 52.984,
            "eps_GHz": -15.0,
        },
    },
    "fig3d": {
        "experiment": "cz-compare",
        "device": "gate",
        "settings": {
            "shapes": ["hann", "rect", "rect+filter"],
            "t_g_ns": 100.0,
            "eps_GHz": -15.0,
        },
    },
    "fig3e": {"experiment": "pulse-spectrum", "device": "gate"},
    "fig4a": {"experiment": "cnot", "device": "gate"},
    "fig4b": {"experiment": "cnot-robustness", "device": "gate"},
    "fig5": {"experiment": "noise-sweep", "device": "gate"},
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="artifact directory (default runs/<name>)")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--workers", type=int, help="parallel workers (default: cores)")
    p.add_argument("--dt", type=float, dest="dt_ns", help="integrator step (ns)")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=JSON",
        help="override a settings key, e.g. --set n_samples=10",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    prun = sub.add_parser("run", help="run an experiment from a JSON config")
    prun.add_argument("--config", required=True)
    _add_common(prun)
    for alias in _ALIAS_CONFIGS:
        p = sub.add_parser(alias, help=f"bundled experiment {alias}")
        _add_common(p)
    pchk = sub.add_parser("check", help="verify a run directory's manifest")
    pchk.add_argument("--out", required=True)
    return parser


def _apply_overrides(data: dict, args) -> dict:
    data = dict(data)
    out_env = os.environ.get("SPINBUS_OUT")
    seed_env = os.environ.get("SPINBUS_SEED")
    if args.out or out_env:
        data["out_dir"] = args.out or out_env
    if args.seed is not None:
        data["seed"] = args.seed
    elif seed_env is not None:
        data["seed"] = int(seed_env)
    if args.workers is not None:
        data["workers"] = args.workers
    if getattr(args, "dt_ns", None):
        data["dt_ns"] = args.dt_ns
    overrides = getattr(args, "set", [])
    if overrides:
        settings = dict(data.get("settings", {}))
        for item in overrides:
            key, _, raw = item.partition("=")
            if not raw:
                raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
            try:
                settings[key] = json.loads(raw)
            except json.JSONDecodeError:
                settings[key] = raw
        data["settings"] = settings
    return data


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        problems = check_manifest(args.out)
        for p in problems:
            print(f"check: {p}", file=sys.stderr)
        print("ok" if not problems else f"{len(problems)} problem(s)")
        return 0 if not problems else 3
    try:
        if args.command == "run":
            cfg_data = _apply_overrides(_load_raw(args.config), args)
            config = parse_config(cfg_data)
        else:
            data = dict(_ALIAS_CONFIGS[args.command])
            data.setdefault("out_dir", f"runs/{args.command}")
            config = parse_config(_apply_overrides(data, args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run(config)
    except ExperimentError as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(manifest.config.get("result_summary", {}), indent=2, sort_keys=True))
    print(f"artifacts in {config.out_dir}")
    return 0


def _load_raw(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
