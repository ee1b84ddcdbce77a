"""Tests for the training harness: configs, determinism, checkpointing."""

import json

import numpy as np
import pytest

from lpnet.model import load_model
from lpnet.systems import N_HISTORY, build_dataset
from lpnet.training import (
    RUN_PRESETS,
    Metrics,
    RunConfig,
    SplitArrays,
    config_from_json,
    config_to_json,
    evaluate,
    load_arrays,
    make_model,
    mse,
    multi_seed_summary,
    run_config,
    stack_split,
    train_run,
)


def toy_split(seed, s=2, m=20):
    """Small smooth forecasting task sharing the real layout (50-point history)."""
    rng = np.random.default_rng(seed)
    dt = 0.1
    t = dt * np.arange(N_HISTORY + m)
    phase = rng.uniform(0, 2 * np.pi, size=(s, 1))
    x = np.sin(2 * np.pi * t / 3.0 + phase)
    y = 0.3 * np.sin(2 * np.pi * t / 3.0 + phase - 0.4)
    return SplitArrays(
        t_hist=t[:N_HISTORY],
        x_hist=x[:, :N_HISTORY],
        y_hist=y[:, :N_HISTORY],
        t_fore=t[N_HISTORY:],
        x_fore=x[:, N_HISTORY:],
        y_fore=y[:, N_HISTORY:],
    )


def toy_data():
    return {"train": toy_split(0), "val": toy_split(1), "test": toy_split(2)}


def toy_config(**overrides):
    kw = dict(
        epochs=2,
        n_ilt=8,
        enc_width=8,
        enc_layers=1,
        h_width=8,
        h_layers=2,
        window_count=2,
        kappa_h=10.0,
        learning_rate=1e-2,
        micro_batch=8,
        c_shift=0.5,
    )
    kw.update(overrides)
    return run_config(1, **kw)


class TestMse:
    def test_identical_is_zero(self):
        assert mse(np.ones((2, 3)), np.ones((2, 3))) == 0.0

    def test_unit_offset_is_one(self):
        assert mse(np.zeros(5), np.ones(5)) == 1.0

    def test_mixed_example(self):
        assert mse(np.array([0.0, 2.0]), np.array([1.0, 0.0])) == 2.5

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mse(np.zeros(3), np.zeros(4))


class TestRunConfig:
    def test_presets_cover_all_datasets(self):
        assert sorted(RUN_PRESETS) == list(range(1, 9))
        for ds in RUN_PRESETS:
            cfg = run_config(ds)
            assert cfg.dataset_id == ds
            cfg.ilt_config()

    def test_preset_row_one(self):
        cfg = run_config(1)
        assert (cfg.lp_type, cfg.n_ilt, cfg.window_count) == ("dlt", 41, 3)
        assert cfg.alpha == pytest.approx(4.51e-3)
        assert cfg.kappa_h == 450.0 and cfg.h_width == 192 and cfg.h_layers == 4
        assert cfg.activation == "tanh" and cfg.enc_width == 56 and cfg.p_degree == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            run_config(9)
        with pytest.raises(ValueError):
            toy_config(learning_rate=0.0)
        with pytest.raises(ValueError):
            toy_config(epochs=-1)
        with pytest.raises(ValueError):
            toy_config(zeta=0.9)  # contour parameter out of range

    def test_json_round_trip(self, tmp_path):
        cfg = toy_config(seeds=(3, 4))
        config_to_json(cfg, tmp_path / "cfg.json")
        back = config_from_json(tmp_path / "cfg.json")
        assert back == cfg

    def test_unknown_field_named(self, tmp_path):
        (tmp_path / "bad.json").write_text(json.dumps({"dataset_id": 1, "warp_speed": 9}))
        with pytest.raises(ValueError, match="warp_speed"):
            config_from_json(tmp_path / "bad.json")

    def test_missing_field_named(self, tmp_path):
        (tmp_path / "bad.json").write_text(json.dumps({"dataset_id": 1}))
        with pytest.raises(ValueError, match="lp_type"):
            config_from_json(tmp_path / "bad.json")


class TestDataPrep:
    def test_stack_split_layout(self):
        data = build_dataset(1, seed=11, splits=("val",))
        arr = stack_split(data["val"])
        assert arr.t_hist.shape == (50,) and arr.t_fore.shape == (500,)
        assert arr.x_hist.shape == (5, 50) and arr.y_fore.shape == (5, 500)
        assert arr.t_fore[0] > arr.t_hist[-1]

    def test_load_arrays_in_memory_deterministic(self):
        cfg = toy_config(data_seed=7)
        a = load_arrays(cfg)
        b = load_arrays(cfg)
        assert np.array_equal(a["train"].y_fore, b["train"].y_fore)


class TestTrainRun:
    def test_same_seed_identical_curves(self):
        data = toy_data()
        m1 = train_run(toy_config(), 5, data)
        m2 = train_run(toy_config(), 5, data)
        assert m1.train_mse == m2.train_mse
        assert m1.val_mse == m2.val_mse
        assert m1.test_mse == m2.test_mse

    def test_different_seeds_differ(self):
        data = toy_data()
        m1 = train_run(toy_config(), 0, data)
        m2 = train_run(toy_config(), 1, data)
        assert m1.train_mse != m2.train_mse

    def test_zero_epochs_is_initialization_eval(self):
        data = toy_data()
        m = train_run(toy_config(epochs=0), 3, data)
        assert len(m.train_mse) == 1 and len(m.val_mse) == 1
        assert m.best_epoch == 0
        # the retained checkpoint is the untouched initialization
        params = make_model(toy_config(), np.random.default_rng(3))
        assert m.test_mse == pytest.approx(evaluate(params, data["test"]), rel=1e-12)

    def test_loss_decreases_on_toy_task(self):
        m = train_run(toy_config(epochs=40), 1, toy_data())
        assert m.train_mse[-1] < m.train_mse[0]

    def test_curves_have_epoch_plus_one_states(self):
        m = train_run(toy_config(epochs=4), 0, toy_data())
        assert len(m.train_mse) == 5

    def test_divergence_reports_epoch(self):
        with np.errstate(all="ignore"), pytest.raises(RuntimeError, match="epoch"):
            train_run(toy_config(epochs=8, learning_rate=1e30), 0, toy_data())

    def test_micro_batching_does_not_change_results(self):
        data = toy_data()
        m1 = train_run(toy_config(micro_batch=1, epochs=3), 2, data)
        m2 = train_run(toy_config(micro_batch=8, epochs=3), 2, data)
        assert np.allclose(m1.train_mse, m2.train_mse, rtol=1e-9)
        assert np.allclose(m1.test_mse, m2.test_mse, rtol=1e-9)

    def test_best_val_state_is_kept(self):
        data = toy_data()
        cfg = toy_config(epochs=25)
        m = train_run(cfg, 4, data)
        assert m.best_val_mse == min(m.val_mse)
        assert m.val_mse[m.best_epoch] == m.best_val_mse


class TestOutputsAndEvaluate:
    def test_written_bundle(self, tmp_path):
        data = toy_data()
        cfg = toy_config(epochs=3, output_dir=str(tmp_path))
        m = train_run(cfg, 7, data)

        csv = (tmp_path / "metrics_seed7.csv").read_text().strip().splitlines()
        assert csv[0] == "epoch,train_mse,val_mse"
        assert len(csv) == 5
        first = csv[1].split(",")
        assert float(first[1]) == m.train_mse[0]

        summary = json.loads((tmp_path / "summary_seed7.json").read_text())
        assert summary["test_mse"] == m.test_mse
        assert summary["seed"] == 7

        # checkpoint round trip: stored best-val weights reproduce test MSE
        ckpt = tmp_path / "model_seed7.npz"
        assert evaluate(ckpt, data["test"], micro_batch=cfg.micro_batch) == pytest.approx(m.test_mse, rel=1e-12)

    def test_evaluate_matches_stored_best_val(self, tmp_path):
        data = toy_data()
        cfg = toy_config(epochs=6, output_dir=str(tmp_path))
        m = train_run(cfg, 2, data)
        got = evaluate(tmp_path / "model_seed2.npz", data["val"], micro_batch=cfg.micro_batch)
        assert got == m.best_val_mse

    def test_zero_model_mse_is_mean_square_target(self):
        data = toy_data()
        params = make_model(toy_config(), np.random.default_rng(0))
        for p in params.parameters:
            p.value[...] = 0.0
        got = evaluate(params, data["test"])
        assert got == pytest.approx(np.mean(data["test"].y_fore ** 2), rel=1e-12)

    def test_repeated_evaluation_identical(self):
        data = toy_data()
        params = make_model(toy_config(), np.random.default_rng(1))
        assert evaluate(params, data["val"]) == evaluate(params, data["val"])

    def test_incompatible_checkpoint_names_field(self, tmp_path):
        from lpnet.model import save_model

        params = make_model(toy_config(), np.random.default_rng(0))
        save_model(tmp_path / "m.npz", params)
        meta = json.loads((tmp_path / "m.json").read_text())
        meta["enc_width"] = None  # corrupt sidecar structurally
        meta["encoder_spec"]["input_dim"] = 99
        (tmp_path / "m.json").write_text(json.dumps(meta))
        with pytest.raises((ValueError, KeyError), match="encoder"):
            load_model(tmp_path / "m.npz")


class TestSummary:
    def test_matches_manual_recomputation(self):
        ms = [
            Metrics(seed=s, train_mse=[], val_mse=[], test_mse=v, best_epoch=0, best_val_mse=v, wall_clock_s=0.0)
            for s, v in enumerate([0.3, 0.1, 0.2])
        ]
        out = multi_seed_summary(ms)
        vals = np.array([0.3, 0.1, 0.2])
        assert out["mean_test_mse"] == pytest.approx(vals.mean())
        assert out["std_test_mse"] == pytest.approx(vals.std(ddof=1))
        assert out["median_test_mse"] == pytest.approx(0.2)
        assert out["seeds"] == [0, 1, 2]
