import warnings

import numpy as np
import pytest

from spinbus.basis import build_operators
from spinbus.presets import gate_device, validation_device


@pytest.fixture(scope="session")
def ops3():
    return build_operators(3)


@pytest.fixture(scope="session")
def ops1():
    return build_operators(1)


@pytest.fixture(scope="session")
def gate_dev():
    return gate_device(eps=-15.0)


@pytest.fixture(scope="session")
def sweet_dev():
    return gate_device(eps=0.0)


@pytest.fixture(scope="session")
def validation_dev():
    return validation_device(eps=-15.0)


@pytest.fixture(autouse=True)
def _quiet_dispersive_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings(
            "ignore", message=".*dispersive condition marginal.*"
        )
        yield


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
