import numpy as np
import pytest
from numpy.random import default_rng

from filstokes.errors import ConfigError
from filstokes.flows import (
    constant_flow,
    flow_from_spec,
    rigid_vortex_flow,
    shear_flow,
    taylor_green_flow,
)

ALL_FLOWS = [
    constant_flow([1.0, -2.0, 0.5]),
    shear_flow(1.3),
    rigid_vortex_flow([0.4, -1.0, 2.0]),
    taylor_green_flow(0.8, 1.7),
]


@pytest.mark.parametrize("flow", ALL_FLOWS, ids=lambda f: f.name)
def test_divergence_free(flow):
    rng = default_rng(10)
    pts = rng.standard_normal((200, 3)) * 2.0
    assert flow.check_divergence_free(pts) <= 1e-10


@pytest.mark.parametrize("flow", ALL_FLOWS, ids=lambda f: f.name)
def test_gradient_matches_finite_differences(flow):
    rng = default_rng(11)
    h = 1e-6
    for _ in range(10):
        x = rng.standard_normal(3)
        g = flow.gradient(0.0, x)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (flow.velocity(0.0, x + e) - flow.velocity(0.0, x - e)) / (2 * h)
            assert np.max(np.abs(g[:, j] - fd)) <= 1e-6


def test_taylor_green_laplacian_finite_differences():
    flow = taylor_green_flow(0.8, 1.7)
    rng = default_rng(12)
    h = 1e-4
    for _ in range(10):
        x = rng.standard_normal(3)
        lap = np.zeros(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            lap += (
                flow.velocity(0.0, x + e)
                - 2 * flow.velocity(0.0, x)
                + flow.velocity(0.0, x - e)
            ) / h**2
        assert np.max(np.abs(flow.laplacian(0.0, x) - lap)) <= 1e-4


def test_vortex_velocity_is_rigid():
    w = np.array([0.4, -1.0, 2.0])
    flow = rigid_vortex_flow(w)
    x = np.array([0.3, 0.1, -0.7])
    assert np.allclose(flow.velocity(0.0, x), np.cross(w, x))


def test_flow_from_spec():
    flow = flow_from_spec({"name": "shear", "rate": 2.0})
    assert np.allclose(flow.velocity(0.0, np.array([0.0, 3.0, 0.0])), [6.0, 0, 0])
    with pytest.raises(ConfigError):
        flow_from_spec({"name": "tornado"})
    with pytest.raises(ConfigError):
        flow_from_spec({"name": "shear", "rate": 1.0, "bogus": 2})
    with pytest.raises(ConfigError):
        flow_from_spec({"rate": 1.0})
