"""Renderer acceptance: all aliases, schema failures, determinism."""

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from figrender import FIGURES, PlotJob, SchemaError, render
from figrender.tables import load_table

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.mark.parametrize("figure", sorted(FIGURES))
def test_all_aliases_render(figure, tmp_path):
    out = tmp_path / f"{figure}.png"
    result = render(PlotJob(figure=figure, in_dir=FIXTURES, out_file=out))
    assert result == out
    assert out.exists()
    assert out.stat().st_size > 4000  # a real image, not a stub


def test_deterministic_re_render(tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(PlotJob(figure="fig3e", in_dir=FIXTURES, out_file=a))
    render(PlotJob(figure="fig3e", in_dir=FIXTURES, out_file=b))
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_error(tmp_path):
    src = (FIXTURES / "pulse_spectrum.csv").read_text().splitlines()
    broken = tmp_path / "pulse_spectrum.csv"
    header = src[0].replace("Pe_hann", "Pe_window")
    broken.write_text("\n".join([header] + src[1:]) + "\n")
    out = tmp_path / "fig.png"
    with pytest.raises(SchemaError, match="missing column 'Pe_hann'"):
        render(PlotJob(figure="fig3e", in_dir=tmp_path, out_file=out))
    assert not out.exists()


def test_empty_csv_error(tmp_path):
    empty = tmp_path / "pulse_spectrum.csv"
    empty.write_text("tg_wq_over_2pi,Pe_rect,Pe_hann\n")
    out = tmp_path / "fig.png"
    with pytest.raises(SchemaError, match="no data rows"):
        render(PlotJob(figure="fig3e", in_dir=tmp_path, out_file=out))
    assert not out.exists()
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty file"):
        render(PlotJob(figure="fig3e", in_dir=tmp_path, out_file=out))


def test_missing_trace_artifacts(tmp_path):
    with pytest.raises(SchemaError, match="no artifacts matching"):
        render(PlotJob(figure="fig4a", in_dir=tmp_path, out_file=tmp_path / "x.png"))


def test_unknown_figure(tmp_path):
    with pytest.raises(ValueError, match="unknown figure"):
        render(PlotJob(figure="fig9", in_dir=FIXTURES, out_file=tmp_path / "x.png"))


def test_load_table_schema():
    t = load_table(FIXTURES / "noise_sweep.csv", ("sigma_GHz", "mean_infidelity"))
    assert t["sigma_GHz"].min() > 0


def test_cli_render_and_errors(tmp_path):
    cmd = [sys.executable, "-m", "figrender.cli"]
    out = tmp_path / "fig5.png"
    res = subprocess.run(
        cmd + ["render", "--figure", "fig5", "--in", str(FIXTURES), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert out.exists()
    res2 = subprocess.run(
        cmd + ["render", "--figure", "fig5", "--in", str(tmp_path / "nowhere"),
               "--out", str(tmp_path / "y.png")],
        capture_output=True,
        text=True,
    )
    assert res2.returncode == 3
    assert "render failed" in res2.stderr
