import pathlib

import numpy as np
import pytest

import bintopo

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_gol_blinker_and_block():
    block = np.zeros((6, 6), dtype=np.uint8)
    block[2:4, 2:4] = 1
    assert np.array_equal(bintopo.gol_step(block), block)
    blinker = np.zeros((5, 5), dtype=np.uint8)
    blinker[2, 1:4] = 1
    step = bintopo.gol_step(blinker)
    assert np.array_equal(step, blinker.T)
    assert np.array_equal(bintopo.gol_step(step), blinker)


def test_gol_payoff():
    env = bintopo.environment("gol", width=10, height=10)
    assert env.shape == (10, 10, 1)
    d = np.zeros((10, 10), dtype=np.uint8)
    d[4:6, 4:6] = 1
    assert env.evaluate(d) == pytest.approx(0.04)
    assert env.evaluate(d.ravel()) == env.evaluate(d)


def test_run_respects_budget_and_is_deterministic():
    env = bintopo.environment("synthetic", nx=10, target_seed=1)
    a = bintopo.run(env, "ea", budget=57, seed=3)
    b = bintopo.run(env, "ea", budget=57, seed=3)
    assert a["evaluations"] == 57
    assert a["trace"].shape == (57, 3)
    assert np.array_equal(a["trace"], b["trace"])
    assert a["best_payoff"] == a["trace"][:, 2].max()
    assert env.evaluate(a["best"]) == a["best_payoff"]


def test_hyperparameters_pass_through():
    env = bintopo.environment("synthetic", nx=8)
    r = bintopo.run(env, "bppo", budget=40, seed=0, hidden=[16, 16], lr=1e-3)
    assert r["evaluations"] == 40
    with pytest.raises(bintopo.ConfigError):
        bintopo.run(env, "bppo", budget=4, hiddden=[16])
    with pytest.raises(bintopo.ConfigError):
        bintopo.environment("gol", widht=3)


def test_gradient_needs_a_differentiable_environment():
    env = bintopo.environment("gol", width=4, height=4)
    with pytest.raises(bintopo.IncompatibleAlgorithm):
        bintopo.run(env, "grad", budget=5)
    syn = bintopo.environment("synthetic", nx=6)
    assert syn.differentiable
    assert len(syn.relaxed_gradient([0.5] * 6)) == 6


def test_errors_map_to_python_exceptions():
    env = bintopo.environment("gol", width=4, height=4)
    with pytest.raises(bintopo.ShapeMismatch):
        env.evaluate(np.zeros(5, dtype=np.uint8))
    with pytest.raises(bintopo.Error):
        bintopo.design_variance([np.zeros(3, dtype=np.uint8)], 2)
    assert bintopo.splitter_objective([0.65, 0.35], [0.65, 0.35]) == 1.0


def test_fabrication_and_pbd_round_trip(tmp_path):
    dot = np.zeros((5, 5), dtype=np.uint8)
    dot[2, 2] = 1
    assert not bintopo.apply_fabrication(dot, "bottom").any()
    rng = np.random.default_rng(0)
    d = rng.integers(0, 2, size=(7, 9), dtype=np.uint8)
    once = bintopo.apply_fabrication(d, "left")
    assert np.array_equal(bintopo.apply_fabrication(once, "left"), once)
    path = str(tmp_path / "d.pbd")
    bintopo.save_pbd(path, d)
    assert np.array_equal(bintopo.load_pbd(path), d)


def test_run_experiment_from_config(tmp_path):
    r = bintopo.run_experiment(str(CONFIGS / "gol_random.ini"), budget=30, seeds=[0, 1],
                               out_dir=str(tmp_path), jobs=1, write=True)
    assert len(r["seeds"]) == 2
    assert r["mean"] == pytest.approx(np.mean([s["best_payoff"] for s in r["seeds"]]))
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "trace_1.csv").read_text().startswith("step,payoff,best,wall_ms\n")


def test_optimizer_names():
    assert set(bintopo.optimizer_names()) == {"random", "duct", "ea", "grad", "iql", "bac", "bppo"}
