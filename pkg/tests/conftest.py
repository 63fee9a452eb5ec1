"""
Pytest configuration and shared fixtures for the engine tests.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from catalog import load  # noqa: E402
from spacetime import ChartedSpacetime  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale runs (hundreds of samples, geodesic hunts)")


@pytest.fixture(scope="session")
def minkowski():
    """The null hyperplane t = x in Minkowski space."""
    return load("minkowski_hyperplane")


@pytest.fixture(scope="session")
def minkowski_scaled():
    return load("minkowski_hyperplane_scaled")


@pytest.fixture(scope="session")
def cone():
    return load("minkowski_cone")


@pytest.fixture(scope="session")
def ppwave():
    return load("ppwave_wavefront")


@pytest.fixture(scope="session")
def twisted():
    return load("ppwave_wavefront_twisted")


@pytest.fixture(scope="session")
def ppwave_flat():
    return load("ppwave_flat")


@pytest.fixture(scope="session")
def desitter():
    return load("desitter_horizon")


@pytest.fixture(scope="session")
def ads():
    return load("ads_slice")


@pytest.fixture(scope="session")
def torus():
    return load("flat_torus")


@pytest.fixture
def flat_space():
    """Bare 4d Minkowski spacetime without a hypersurface."""
    return ChartedSpacetime(
        ["t", "x", "y", "z"],
        [["-1", "0", "0", "0"], ["1", "0", "0"], ["1", "0"], ["1"]],
        [(-2.0, 2.0)] * 4,
        name="flat",
    )


@pytest.fixture
def sphere_space():
    """Static chart of a product R x S^2 with unit sphere, for curvature checks."""
    return ChartedSpacetime(
        ["t", "th", "ph"],
        [["-1", "0", "0"], ["1", "0"], ["sin(th)^2"]],
        [(-1.0, 1.0), (0.3, 2.8), (0.0, 2.0 * np.pi)],
        periods={"ph": 2.0 * np.pi},
        name="cylinder",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scenario_dict():
    """A minimal valid scenario mapping (3d null plane t = x)."""
    return {
        "name": "plane3",
        "coordinates": ["t", "x", "y"],
        "bounds": {"t": [-1, 1], "x": [-1, 1], "y": [-1, 1]},
        "metric": [["-1", "0", "0"], ["1", "0"], ["1"]],
        "level_function": "t - x",
        "rigging": ["1", "0", "0"],
        "graph_coordinate": "t",
        "expected": [{"probe": "max_abs_B", "value": 0, "tolerance": 1e-8, "provenance": "flat"}],
    }
