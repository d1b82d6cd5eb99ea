import json

import numpy as np
import pytest

from filstokes.cli import main
from filstokes.outputs import read_field, read_trajectory_csv


def write_config(path, data):
    path.write_text(json.dumps(data, indent=1))
    return str(path)


def ring_constant_config(tmp_path, U=(0.5, 0.0, 0.25), **overrides):
    data = {
        "curves": [{"preset": "circle"}],
        "poses": [{"translation": [0.0, 0.0, 0.0]}],
        "flow": {"name": "constant", "U": list(U)},
        "model": "limit",
        "T": 1.0,
        "dt": 0.02,
        "nodes": 32,
        "seed": 7,
    }
    data.update(overrides)
    return write_config(tmp_path / "config.json", data)


def test_simulate_constant_flow_translates(tmp_path):
    cfg = ring_constant_config(tmp_path)
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    cols = read_trajectory_csv(tmp_path / "out" / "trajectory.csv")
    last = cols["t"] == cols["t"].max()
    assert np.allclose(
        [cols["hx"][last][0], cols["hy"][last][0], cols["hz"][last][0]],
        [0.5, 0.0, 0.25],
        atol=1e-12,
    )
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["halted_at_collision"] is False
    assert manifest["config"]["flow"]["name"] == "constant"
    assert "numpy" in manifest["versions"]


def test_simulate_deterministic_output(tmp_path):
    cfg = ring_constant_config(tmp_path)
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a == b


def test_run_reproducible_from_manifest_alone(tmp_path):
    cfg = ring_constant_config(tmp_path)
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    replay = write_config(tmp_path / "replay.json", manifest["config"])
    main(["simulate", "--config", replay, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (
        tmp_path / "b" / "trajectory.csv"
    ).read_bytes()


def test_simulate_dump_matrices_and_plots(tmp_path):
    cfg = ring_constant_config(tmp_path, outputs={"trajectory": True, "plots": True})
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out"),
               "--dump-matrices"])
    assert rc == 0
    K = np.loadtxt(tmp_path / "out" / "resistance_0.csv", delimiter=",")
    assert K.shape == (6, 6)
    assert np.allclose(K, K.T, atol=1e-9 * np.max(np.abs(K)))
    assert (tmp_path / "out" / "trajectory.svg").exists()
    assert (tmp_path / "out" / "faxen_0.csv").exists()


def test_simulate_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json }")
    rc = main(["simulate", "--config", str(bad), "--out", str(tmp_path / "out")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "line" in err


def test_simulate_collision_manifest(tmp_path):
    data = {
        "curves": [{"preset": "circle"}, {"preset": "circle"}],
        "poses": [
            {"translation": [-2.5, 0.6, 0.0]},
            {"translation": [2.5, -0.6, 0.005]},
        ],
        "flow": {"name": "shear", "rate": 1.0},
        "model": "limit",
        "T": 4.0,
        "dt": 0.05,
        "nodes": 32,
    }
    cfg = write_config(tmp_path / "collide.json", data)
    rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["halted_at_collision"] is True
    assert manifest["collision_time"] < 4.0


def relaxation_config(tmp_path, eps, T, dt, name):
    data = {
        "curves": [{"preset": "circle"}],
        "poses": [{"axis_angle": {"axis": [1, 0, 0], "angle": 0.628}}],
        "flow": {"name": "shear", "rate": 1.0},
        "model": "relaxation",
        "eps": eps,
        "initial_twists": [[0, 0, 0, 0, 0, 0]],
        "T": T,
        "dt": dt,
        "nodes": 32,
    }
    return write_config(tmp_path / name, data)


def test_relaxation_manifest_decay_rates(tmp_path):
    # rates scale like 1 / (eps^2 |log eps|): about 67x between these runs
    cfg2 = relaxation_config(tmp_path, 1e-2, T=6e-3, dt=2e-5, name="eps2.json")
    cfg3 = relaxation_config(tmp_path, 1e-3, T=1.2e-4, dt=4e-7, name="eps3.json")
    rates = {}
    for eps, cfg in ((1e-2, cfg2), (1e-3, cfg3)):
        out = tmp_path / f"out{eps:g}"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["model"] == "relaxation"
        rate = manifest["fitted_decay_rate"]
        assert rate is not None
        predicted = manifest["predicted_decay_rate"]
        assert abs(rate - predicted) <= 0.25 * predicted
        rates[eps] = rate
    ratio = rates[1e-3] / rates[1e-2]
    assert 40.0 <= ratio <= 120.0


def test_field_subcommand(tmp_path):
    data = {
        "curves": [{"preset": "circle"}],
        "flow": {"name": "constant", "U": [0.0, 0.0, 1.0]},
        "model": "limit",
        "T": 0.1,
        "nodes": 32,
        "grid": {"origin": [-2.0, -2.0, 0.4], "spacing": 0.5, "dims": 9},
    }
    cfg = write_config(tmp_path / "field.json", data)
    rc = main(["field", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    origin, spacing, dims, u, p, mask = read_field(tmp_path / "out" / "field.txt")
    assert dims == (9, 9, 9)
    assert spacing == 0.5
    assert np.all(np.isfinite(u))
    report = json.loads((tmp_path / "out" / "field_report.json").read_text())
    assert report["max_scaled_divergence"] is not None
    assert (tmp_path / "out" / "field.csv").exists()
    assert (tmp_path / "out" / "field_slice.svg").exists()


def test_field_grid_override(tmp_path):
    data = {
        "curves": [{"preset": "circle"}],
        "flow": {"name": "constant", "U": [0.0, 0.0, 1.0]},
        "model": "limit",
        "T": 0.1,
        "nodes": 32,
    }
    cfg = write_config(tmp_path / "field.json", data)
    rc = main(["field", "--config", cfg, "--out", str(tmp_path / "out"),
               "--grid", "5"])
    assert rc == 0
    _, _, dims, *_ = read_field(tmp_path / "out" / "field.txt")
    assert dims == (5, 5, 5)


def test_verify_subcommand(tmp_path, capsys):
    rc = main(["verify", "kernels", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    payload = json.loads((tmp_path / "verify_kernels.json").read_text())
    assert payload["passed"] is True
    assert len(payload["checks"]) >= 3


def test_verify_unknown_suite_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2


def test_sweep_dt_subcommand(tmp_path, capsys):
    data = {
        "curves": [{"preset": "circle"}],
        "poses": [{"translation": [1.0, 0.0, 0.3]}],
        "flow": {"name": "vortex", "omega": [0.0, 0.0, 1.0]},
        "model": "limit",
        "T": 0.5,
        "nodes": 32,
    }
    cfg = write_config(tmp_path / "vortex.json", data)
    rc = main(["sweep", "--config", cfg, "--param", "dt",
               "--values", "0.05,0.025,0.0125,0.00625",
               "--out", str(tmp_path / "sweep")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "observed_order" in out
    rows = (tmp_path / "sweep" / "sweep_dt.csv").read_text().strip().splitlines()
    assert rows[0] == "dt,error,order"
    order = float(rows[1].split(",")[2])
    assert abs(order - 4.0) <= 0.3
    assert (tmp_path / "sweep" / "sweep_dt.svg").exists()
