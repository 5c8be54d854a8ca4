"""Effective-parameter fitting."""

import numpy as np
import pytest

from spinbus.effective import EffectiveParams
from spinbus.fitting import FitSpec, fit_effective, fit_synthetic
from spinbus.presets import validation_device


def test_fitspec_validation():
    with pytest.raises(ValueError):
        FitSpec(t0=-1.0)
    with pytest.raises(ValueError, match="at least 8"):
        FitSpec(n_samples=4)
    times = FitSpec(t0=1000.0, n_samples=10).sample_times()
    assert len(times) == 10
    assert times[0] > 0 and times[-1] == pytest.approx(1000.0)


def test_synthetic_recovery():
    """Dynamics generated from a known model: parameters recovered to
    better than 1e-6 GHz from a start perturbed at the accuracy level of
    the analytic parameters."""
    true = EffectiveParams(5.95, 5.93, 5.8, 1.2e-4, 3.1e-4, 1.5e-6)
    start = EffectiveParams(
        5.95 + 2.4e-6, 5.93 - 1.7e-6, 5.8 + 0.9e-6,
        1.2e-4 - 2.1e-6, 3.1e-4 + 2.7e-6, 0.0,
    )
    res = fit_synthetic(true, start)
    assert np.abs(res.deltas).max() < 1e-6
    assert res.mean_fidelity > 1 - 1e-9


def test_fit_improves_and_recovers(validation_dev):
    res = fit_effective(validation_dev, FitSpec())
    assert res.mean_fidelity >= res.start_fidelity
    assert res.mean_fidelity > 0.975
    assert not res.projector_suspect
    va, vf = res.analytic.as_vector(), res.fitted.as_vector()
    assert abs(vf[3] - va[3]) / abs(va[3]) < 0.10  # resonator coupling
    assert abs(vf[4] - va[4]) / abs(va[4]) < 0.10  # exchange
    assert abs(vf[5]) < 4e-6  # residual Ising below 4 kHz
    assert np.abs(vf[:3] - va[:3]).max() < 1e-3  # frequencies within 1 MHz


@pytest.mark.slow
def test_fit_stable_under_sample_doubling(validation_dev):
    spec = FitSpec(t0=20000.0, n_samples=50)
    spec2 = FitSpec(t0=20000.0, n_samples=100)
    r1 = fit_effective(validation_dev, spec)
    r2 = fit_effective(validation_dev, spec2)
    assert np.abs(r1.fitted.as_vector() - r2.fitted.as_vector()).max() < 2e-6
