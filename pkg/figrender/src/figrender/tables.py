"""CSV artifact loading with schema checks.

The renderer consumes the delimited artifacts published by the simulator
CLI; it never recomputes physics.  Every loader validates the header and
raises :class:`SchemaError` naming the offending column, and refuses
empty tables.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input artifact does not match the documented schema."""


def load_table(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a CSV into named float columns, enforcing required names."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file (no header)") from None
        rows = [row for row in reader if row]
    for column in required:
        if column not in header:
            raise SchemaError(f"{path.name}: missing column {column!r}")
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    data = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{path.name}: row {i + 2} has {len(row)} fields")
        try:
            data[i] = [float(v) for v in row]
        except ValueError as exc:
            raise SchemaError(f"{path.name}: row {i + 2}: {exc}") from exc
    return {name: data[:, j] for j, name in enumerate(header)}


GATE_TRACE_COLUMNS = ("time_ns", "fidelity", "infidelity", "unitarity")
FIT_SWEEP_COLUMNS = (
    "detuning_GHz",
    "t_T23_GHz",
    "omega_D_GHz_fit",
    "omega_T_GHz_fit",
    "omega_3_GHz_fit",
    "J_r_GHz_fit",
    "J_e_GHz_fit",
    "J_ZZ_GHz_fit",
    "omega_D_GHz_analytic",
    "omega_T_GHz_analytic",
    "omega_3_GHz_analytic",
    "J_r_GHz_analytic",
    "J_e_GHz_analytic",
    "J_ZZ_GHz_analytic",
    "fit_fidelity",
)
SPECTRUM_COLUMNS = ("tg_wq_over_2pi", "Pe_rect", "Pe_hann")
ROBUSTNESS_COLUMNS = ("omega_d_GHz", "best_fidelity", "best_t_g_ns")
NOISE_COLUMNS = (
    "t_T23_GHz",
    "sigma_GHz",
    "mean_infidelity",
    "std_infidelity",
    "n_ok",
    "n_failed",
)
