"""Configuration loading, CLI dispatch, artifacts, determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from spinbus.config import ConfigError, load_config, parse_config
from spinbus.runner import check_manifest, run


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_minimal_config_defaults(tmp_path):
    p = write_cfg(tmp_path, {"experiment": "cz", "device": "gate:-15"})
    cfg = load_config(p)
    assert cfg.experiment == "cz"
    assert cfg.device.n_r == 3
    assert cfg.seed == 0
    assert cfg.out_dir == "runs"
    assert cfg.dt_ns is None


def test_alias_experiment_names(tmp_path):
    p = write_cfg(tmp_path, {"experiment": "fig4a", "device": "gate"})
    assert load_config(p).experiment == "cnot"


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key 'bogus'"):
        parse_config({"experiment": "cz", "device": "gate", "bogus": 1})
    with pytest.raises(ConfigError, match="settings.'nope'"):
        parse_config({"experiment": "cz", "device": "gate", "settings": {"nope": 1}})


def test_invalid_n_r_rejected(tmp_path):
    with pytest.raises(ConfigError, match="n_r"):
        parse_config({"experiment": "cz", "device": "gate", "n_r": 0})


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(p)
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.json")


def test_config_round_trip(tmp_path):
    data = {
        "experiment": "cnot",
        "device": {"preset": "gate", "eps": 0.0, "t_T23": 0.45},
        "settings": {"Omega_eff_x_GHz": 0.02},
        "seed": 7,
        "out_dir": "x",
    }
    cfg = parse_config(data)
    again = parse_config(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()


def test_inline_device_config(tmp_path):
    from spinbus.device import device_to_dict
    from spinbus.presets import gate_device

    data = {
        "experiment": "cz",
        "device": device_to_dict(gate_device(eps=-15.0)),
    }
    cfg = parse_config(data)
    assert cfg.device.dqd.eps_D1 == pytest.approx(7.5)


def test_pulse_spectrum_run_and_manifest(tmp_path):
    cfg = parse_config(
        {
            "experiment": "pulse-spectrum",
            "device": "gate",
            "out_dir": str(tmp_path / "out"),
            "settings": {"n_points": 101, "x_max": 10.0},
        }
    )
    manifest = run(cfg)
    out = tmp_path / "out"
    assert (out / "pulse_spectrum.csv").exists()
    assert (out / "manifest.json").exists()
    assert manifest.artifacts
    assert check_manifest(out) == []
    # corrupt an artifact: the check reports it
    (out / "pulse_spectrum.csv").write_text("tampered")
    problems = check_manifest(out)
    assert problems and "checksum" in problems[0]


def test_run_deterministic_bytes(tmp_path):
    outs = []
    for sub in ("a", "b"):
        cfg = parse_config(
            {
                "experiment": "pulse-spectrum",
                "device": "gate",
                "out_dir": str(tmp_path / sub),
                "seed": 3,
            }
        )
        run(cfg)
        outs.append((tmp_path / sub / "pulse_spectrum.csv").read_bytes())
    assert outs[0] == outs[1]


def test_cli_exit_codes(tmp_path):
    env_cmd = [sys.executable, "-m", "spinbus.cli"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "unknown-exp", "device": "gate"}))
    res = subprocess.run(
        env_cmd + ["run", "--config", str(bad)], capture_output=True, text=True
    )
    assert res.returncode == 2
    assert "config error" in res.stderr
    res2 = subprocess.run(
        env_cmd
        + ["fig3e", "--out", str(tmp_path / "spec_out"), "--set", "n_points=51"],
        capture_output=True,
        text=True,
    )
    assert res2.returncode == 0, res2.stderr
    assert (tmp_path / "spec_out" / "pulse_spectrum.csv").exists()
    res3 = subprocess.run(
        env_cmd + ["check", "--out", str(tmp_path / "spec_out")],
        capture_output=True,
        text=True,
    )
    assert res3.returncode == 0
    assert "ok" in res3.stdout
