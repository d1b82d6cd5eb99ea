import pytest

from filstokes.config import parse_config
from filstokes.errors import ConfigError
from filstokes.sweeps import convergence_study


def vortex_cfg():
    return parse_config({
        "curves": [{"preset": "circle"}],
        "poses": [{"translation": [1.0, 0.0, 0.3]}],
        "flow": {"name": "vortex", "omega": [0.0, 0.0, 1.0]},
        "model": "limit",
        "T": 0.5,
        "nodes": 32,
    })


def shear_ring_cfg():
    return parse_config({
        "curves": [{"preset": "circle"}],
        "poses": [{"axis_angle": {"axis": [1, 0, 0], "angle": 0.628}}],
        "flow": {"name": "shear", "rate": 1.0},
        "model": "relaxation",
        "eps": 0.1,
        "initial_twists": [[0, 0, 0, 0, 0, 0]],
        "T": 0.3,
        "dt": 2e-3,
        "nodes": 32,
    })


def test_dt_sweep_observed_order():
    result = convergence_study(vortex_cfg(), "dt", [0.05, 0.025, 0.0125, 0.00625])
    assert abs(result.summary["observed_order"] - 4.0) <= 0.3


def test_nodes_sweep_errors_drop():
    result = convergence_study(vortex_cfg(), "nodes", [64, 128, 256])
    errs = [row["rel_error"] for row in result.rows]
    # closed curve: already at the resampling floor, far below 1e-8
    assert max(errs) <= 1e-8


def test_eps_sweep_monotone(tmp_path):
    result = convergence_study(shear_ring_cfg(), "eps", [1e-1, 1e-2],
                               out_dir=tmp_path)
    errs = [row["sup_pose_error"] for row in result.rows]
    assert result.summary["monotone_decreasing"] is True
    assert errs[0] > errs[1]
    # fitted rates scale like 1/(eps^2 |log eps|)
    scaled = [row["rate_times_eps2_log"] for row in result.rows]
    assert abs(scaled[0] - scaled[1]) <= 0.3 * abs(scaled[0])
    assert (tmp_path / "sweep_eps.csv").exists()


def test_sweep_needs_two_points():
    with pytest.raises(ConfigError):
        convergence_study(vortex_cfg(), "dt", [0.1])
    with pytest.raises(ConfigError):
        convergence_study(vortex_cfg(), "bogus", [0.1, 0.2])
