"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from gaussring.gaussdyn import NonlinearCoupling
from gaussring.lingrid import KGrid
from gaussring.ringscene import RingDefectParams, build_fwm_scenario

#: coupling scale reproducing the baseline pair probability 0.01265 on the
#: production 201-point grid with the full engine
CALIBRATED_LAMBDA = 7472326.499492696


@pytest.fixture(scope="session")
def coupling():
    return NonlinearCoupling(CALIBRATED_LAMBDA)


@pytest.fixture(scope="session")
def grid_small():
    """Coarse grid for fast full-kernel solves."""
    return KGrid.default(41)


@pytest.fixture(scope="session")
def grid_medium():
    return KGrid.default(101)


@pytest.fixture(scope="session")
def grid_production():
    return KGrid.default()


@pytest.fixture(scope="session")
def ideal_scenario():
    return build_fwm_scenario(RingDefectParams())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
