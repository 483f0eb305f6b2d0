import json
import math
import pathlib

import numpy as np
import pytest

import terradapt as td

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_tracked_derivative_matches_model():
    p = td.TrackedParams()
    s = td.TrackedState(0.0, 0.0, 0.3, 0.5, 0.2)
    eta = np.array([0.7, 0.9])
    u = np.array([1.0, -0.5])
    d = td.tracked_derivative(s, u, p, eta)
    A = p.a_nominal()
    B = p.b_nominal()
    vdot = A @ np.array([0.5, 0.2]) + np.diag(eta) @ B @ u
    assert d[0] == pytest.approx(0.5 * math.cos(0.3), abs=1e-12)
    assert d[1] == pytest.approx(0.5 * math.sin(0.3), abs=1e-12)
    assert d[2] == pytest.approx(0.2, abs=1e-12)
    np.testing.assert_allclose(d[3:], vdot, atol=1e-12)


def test_integrate_and_wrap():
    p = td.TrackedParams()
    s = td.TrackedState(psi=3.1, omega=1.0)
    nxt = td.integrate_tracked(s, np.array([0.0, 1.0]), p, np.ones(2), 0.1)
    assert -math.pi < nxt.psi <= math.pi
    assert td.wrap_angle(3 * math.pi) == pytest.approx(math.pi)


def test_world_and_net():
    spec = {"rows": 4, "cols": 8, "tile_rows": 4, "tile_cols": 8, "feature_dim": 3, "layout": "stripes",
            "classes": [{"name": "a", "eta": [1.0, 1.0]}, {"name": "b", "eta": [0.5, 0.6]}]}
    world = td.build_world(spec)
    assert (world.rows, world.cols, world.feature_dim) == (4, 8, 3)
    assert world.num_classes == 2
    np.testing.assert_allclose(world.eta_tracked_at(3.5, 0.1), [0.5, 0.6])

    net = td.BasisNet.initialized(5, [16, 16], td.BasisShape(2, 2, 4), td.Activation.Tanh, 3)
    assert net.output_dim == 16
    for w in net.weights():
        assert np.linalg.norm(w, 2) <= 1.0 + 1e-9
    flat = net.forward_flat(np.zeros(5))
    comps = net.components(np.zeros(2), np.zeros(3))
    assert len(comps) == 4
    np.testing.assert_allclose(comps[1].ravel(), flat[4:8])
    theta = np.arange(4.0)
    expected = sum(t * c for t, c in zip(theta, comps))
    np.testing.assert_allclose(td.contract(flat, net.shape, theta), expected, atol=1e-12)


def test_checkpoint_round_trip(tmp_path):
    net = td.BasisNet.initialized(4, [8], td.BasisShape(), td.Activation.Tanh, 1)
    path = tmp_path / "net.ckpt"
    td.save_checkpoint(net, np.ones(4), path)
    loaded, theta0 = td.load_checkpoint(path)
    np.testing.assert_array_equal(loaded.parameters(), net.parameters())
    np.testing.assert_array_equal(theta0, np.ones(4))
    path.write_bytes(b"garbage")
    with pytest.raises(td.IoError):
        td.load_checkpoint(path)


def test_theta_star_and_gradcheck():
    rng = np.random.default_rng(0)
    net = td.BasisNet.initialized(4, [6], td.BasisShape(), td.Activation.Tanh, 2)
    T = 30
    traj = td.Trajectory(rng.normal(size=(2, T)), rng.normal(size=(2, T)), rng.normal(size=(2, T)),
                         rng.normal(size=(2, T)))
    ds = td.TrajectoryDataset()
    ds.feature_dim = 2
    ds.trajectories = [traj]
    w = td.Window(0, 5, 20)
    theta, cost = td.solve_theta_star(net, traj, w, 0.1, np.ones(4))
    assert theta.shape == (4,) and cost >= 0.0
    loss, grad = td.meta_loss(net, ds, [w], 0.1, np.ones(4))
    assert grad.shape == (net.num_parameters,)
    assert td.gradcheck_meta(net, ds, [w], 0.1, np.ones(4)) < 1e-4


def test_config_error_is_value_error(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"extends": str(CONFIGS / "base.json"), "runs": 0}))
    with pytest.raises(ValueError):
        td.load_config(cfg)


def test_pipeline_small(tmp_path):
    cfg_path = tmp_path / "small.json"
    cfg_path.write_text(json.dumps({
        "extends": str(CONFIGS / "base.json"),
        "name": "small",
        "output_dir": str(tmp_path / "out"),
        "runs": 2,
        "sim": {"duration": 4.0},
        "datagen": {"steps": 600},
        "trainer": {"max_iters": 5, "batch_size": 4, "window_max_s": 5.0, "hidden": [8]},
    }))
    cfg = td.load_config(cfg_path)
    assert cfg.name == "small"
    gen = td.gen_data(cfg)
    assert isinstance(gen, dict)
    assert cfg.dataset.exists()
    td.train(cfg)
    assert cfg.checkpoint.exists()
    summary, columns, table = td.run_once(cfg, 0, "dnn")
    assert table.shape[1] == len(columns) and table.shape[0] > 0
    metrics = td.evaluate(cfg)
    assert isinstance(metrics, dict)
    assert (tmp_path / "out" / "evaluate" / "metrics.json").exists()
