"""Runner-level coverage of the heavier experiment dispatchers
(reduced sizes; the headline numbers live in the acceptance module)."""

import json

import numpy as np
import pytest

from spinbus.config import parse_config
from spinbus.runner import check_manifest, run

pytestmark = pytest.mark.slow


def test_cnot_experiment_artifacts(tmp_path):
    cfg = parse_config(
        {
            "experiment": "cnot",
            "device": {"preset": "gate", "t_T23": 0.0},
            "out_dir": str(tmp_path),
        }
    )
    manifest = run(cfg)
    summary = json.loads((tmp_path / "cnot_t23_0_summary.json").read_text())
    assert abs(summary["peak_fidelity"] - 0.9829) < 0.01
    assert abs(summary["t_peak_ns"] - 323.6) < 6.0
    trace = (tmp_path / "cnot_t23_0.csv").read_text().splitlines()
    assert trace[0] == "time_ns,fidelity,infidelity,unitarity"
    assert len(trace) > 1000
    assert check_manifest(tmp_path) == []
    assert manifest.config["result_summary"]["max_fidelity"] == pytest.approx(
        summary["peak_fidelity"]
    )


def test_robustness_experiment_small_grid(tmp_path):
    cfg = parse_config(
        {
            "experiment": "cnot-robustness",
            "device": {"preset": "gate", "t_T23": 0.0},
            "out_dir": str(tmp_path),
            "settings": {"omega_d_offsets_MHz": [-4, 0, 4]},
        }
    )
    run(cfg)
    rows = (tmp_path / "cnot_robustness.csv").read_text().splitlines()
    assert rows[0] == "omega_d_GHz,best_fidelity,best_t_g_ns"
    table = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    assert table.shape[0] == 3
    center = table[1]
    # cross-resonance condition: the peak sits at the qubit frequency
    assert center[1] >= table[0][1] - 1e-3
    assert center[1] >= table[2][1] - 1e-3
    # approximate symmetry of the detuned points
    assert abs(table[0][1] - table[2][1]) < 0.5 * (center[1] - min(table[0][1], table[2][1]) + 1e-3)


def test_noise_experiment_tiny(tmp_path):
    cfg = parse_config(
        {
            "experiment": "noise-sweep",
            "device": {"preset": "gate", "t_T23": 0.0},
            "out_dir": str(tmp_path),
            "seed": 5,
            "settings": {
                "sigmas_GHz": [0.05],
                "n_samples": 3,
                "t_T23_values": [0.0],
            },
        }
    )
    run(cfg)
    rows = (tmp_path / "noise_sweep.csv").read_text().splitlines()
    assert rows[0] == "t_T23_GHz,sigma_GHz,mean_infidelity,std_infidelity,n_ok,n_failed"
    vals = rows[1].split(",")
    assert int(vals[4]) == 3 and int(vals[5]) == 0
    summary = json.loads((tmp_path / "noise_sweep_summary.json").read_text())
    assert summary["seed"] == 5


def test_cz_experiment_artifacts(tmp_path):
    cfg = parse_config(
        {
            "experiment": "cz",
            "device": "gate",
            "out_dir": str(tmp_path),
            "settings": {"shape": "hann", "t_g_ns": 30.0, "eps_GHz": -15.0},
        }
    )
    run(cfg)
    files = {p.name for p in tmp_path.iterdir()}
    assert "cz_hann_tg30ns_epsm15.csv" in files
    assert "cz_hann_tg30ns_epsm15_waveform.csv" in files
    wf = (tmp_path / "cz_hann_tg30ns_epsm15_waveform.csv").read_text().splitlines()
    assert wf[0] == "t_ns,J_e_MHz,t_T23_GHz"
    summary = json.loads((tmp_path / "cz_hann_tg30ns_epsm15_summary.json").read_text())
    assert summary["max_infidelity_after_pulse"] < 5e-3


def test_fit_experiment_small(tmp_path):
    cfg = parse_config(
        {
            "experiment": "fit-effective",
            "device": "validation",
            "out_dir": str(tmp_path),
            "workers": 2,
            "settings": {"detunings": [-15.0, -10.5], "t_T23_values": [1.0]},
        }
    )
    run(cfg)
    rows = (tmp_path / "fit_effective_sweep.csv").read_text().splitlines()
    assert len(rows) == 3
    summary = json.loads((tmp_path / "fit_effective_summary.json").read_text())
    assert summary["worst_fit_fidelity"] > 0.975
