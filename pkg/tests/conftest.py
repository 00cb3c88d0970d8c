"""Shared fixtures."""

import numpy as np
import pytest

from epigain.model.params import ModelParams
from epigain.numerics.quadrature import QuadratureConfig
from epigain.optimize.optima import find_optima


def scan_local_maxima(values: np.ndarray, noise: float = 1e-9) -> list:
    """Indices of strict local maxima after flattening steps below `noise`."""
    steps = np.diff(values)
    steps[np.abs(steps) <= noise] = 0.0
    signs = [(i, np.sign(s)) for i, s in enumerate(steps) if s != 0.0]
    return [
        i_next
        for (i, up), (i_next, down) in zip(signs, signs[1:])
        if up > 0 and down < 0
    ]


@pytest.fixture
def local_maxima():
    return scan_local_maxima


@pytest.fixture
def reference_params() -> ModelParams:
    """s_p = 10, s_l = 1, ε = 10⁻³ (the running example of the model)."""
    return ModelParams(s_p=10.0, s_l=1.0, epsilon=1e-3)


@pytest.fixture
def quad_cfg() -> QuadratureConfig:
    return QuadratureConfig()


@pytest.fixture(scope="session")
def reference_optima():
    return find_optima(ModelParams(s_p=10.0, s_l=1.0, epsilon=1e-3))
