"""End-to-end driver runs on desk-size configs: files, hashes, exit codes."""

import json
import warnings

import numpy as np
import pytest

from irlv.channel import ChannelParams, generate_fields, load_field
from irlv.cli import main, proxy_validity_flags
from irlv.config import build_scenario, load_config

CIRCULAR = """\
[scenario]
kind = circular

[channel]
sigma_s_db = 0.0

[nn]
n_hidden = 4
n_layers = 2
learning_rate = 0.5
epochs = 15
batch_size = 32

[dataset]
s_total = 300
p0 = 0.5
train_frac = 0.7

[pso]
n_particles = 2
max_iterations = 2
stall_iterations = 2
objective = both

[eval]
n_np_samples = 10000
n_thetas = 31
resolution_rad = 1e-3

[sweep]
n_hidden = 2,4
s_total = 200,300
n_seeds = 2
n_field_realizations = 25

[seeds]
field = 0
dataset = 1
init = 2
pso = 3
"""


STREET = CIRCULAR.replace("kind = circular", "kind = street")


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def run(args):
    return main([str(a) for a in args])


class TestRoc:
    def test_emits_per_seed_and_mean_curves(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        out = tmp_path / "out"
        assert run(["roc", "--config", cfg, "--out", out]) == 0
        for nh in (2, 4):
            for s in (200, 300):
                for k in (0, 1):
                    assert (out / f"roc_nh{nh}_s{s}_seed{k}.csv").is_file()
                assert (out / f"roc_nh{nh}_s{s}_mean.csv").is_file()
        summary = (out / "auc_summary.csv").read_text().splitlines()
        assert summary[0] == "n_hidden,s_total,seed,auc"
        assert len(summary) == 1 + 4 * 3  # per combo: two seeds and a mean

    def test_manifest_hashes_every_output(self, tmp_path):
        import hashlib

        cfg = write_cfg(tmp_path, CIRCULAR)
        out = tmp_path / "out"
        assert run(["roc", "--config", cfg, "--out", out]) == 0
        manifest = read_manifest(out)
        emitted = {p.name for p in out.iterdir()} - {"manifest.json"}
        assert set(manifest["outputs"]) == emitted
        for name, digest in manifest["outputs"].items():
            assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
        assert manifest["seeds"] == {"field": 0, "dataset": 1, "init": 2, "pso": 3}
        assert "numpy" in manifest["versions"]

    def test_same_config_same_bytes(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["roc", "--config", cfg, "--out", a]) == 0
        assert run(["roc", "--config", cfg, "--out", b]) == 0
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    def test_parallel_jobs_change_nothing(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["roc", "--config", cfg, "--out", a, "--jobs", 1]) == 0
        assert run(["roc", "--config", cfg, "--out", b, "--jobs", 2]) == 0
        assert read_manifest(a)["outputs"] == read_manifest(b)["outputs"]

    def test_seed_offset_changes_results(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["roc", "--config", cfg, "--out", a]) == 0
        assert run(["roc", "--config", cfg, "--out", b, "--seed-offset", 50]) == 0
        assert (a / "auc_summary.csv").read_text() != (b / "auc_summary.csv").read_text()
        assert read_manifest(b)["seed_offset"] == 50


class TestNpCompare:
    def test_curves_share_the_fa_grid(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        out = tmp_path / "out"
        assert run(["np-compare", "--config", cfg, "--out", out]) == 0
        nn = np.loadtxt(out / "nn_roc.csv", delimiter=",", skiprows=1)
        np_ = np.loadtxt(out / "np_roc.csv", delimiter=",", skiprows=1)
        np.testing.assert_array_equal(nn[:, 0], np_[:, 0])
        summary = json.loads((out / "summary.json").read_text())
        assert summary["geometry"] == {
            "r_out": 40.0, "roi_width": 25.0, "roi_height": 25.0, "r_min": 4.0,
        }
        assert 0.0 <= summary["max_vertical_gap"] <= 1.0
        assert summary["auc_np"] <= 0.5

    def test_street_scenario_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR.replace("kind = circular", "kind = street"))
        assert run(["np-compare", "--config", cfg, "--out", tmp_path / "o"]) == 2


class TestPlan:
    def test_emits_histories_means_and_placements(self, tmp_path):
        cfg = write_cfg(tmp_path, STREET)
        out = tmp_path / "out"
        assert run(["plan", "--config", cfg, "--out", out]) == 0
        for obj in ("ce", "auc"):
            for k in (0, 1):
                rows = np.loadtxt(
                    out / f"plan_{obj}_seed{k}.csv", delimiter=",", skiprows=1, ndmin=2
                )
                assert np.all(np.diff(rows[:, 1]) <= 0)  # best value never worsens
            mean = np.loadtxt(
                out / f"plan_{obj}_mean.csv", delimiter=",", skiprows=1, ndmin=2
            )
            assert np.all((mean[:, 1] >= 0.0) & (mean[:, 1] <= 1.0))
            placements = np.loadtxt(
                out / f"plan_{obj}_placements.csv", delimiter=",", skiprows=1, ndmin=2
            )
            assert placements.shape == (2 * 5, 4)  # two seeds, five base stations
            assert np.all((placements[:, 2:] >= 0.0) & (placements[:, 2:] <= 525.0))
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary) == {"ce", "auc"}
        assert isinstance(summary["ce"]["flags"], list)
        assert summary["auc"]["final_mean_auc"] <= summary["auc"]["initial_mean_auc"]

    def test_single_objective_config(self, tmp_path):
        cfg = write_cfg(tmp_path, STREET.replace("objective = both", "objective = auc"))
        out = tmp_path / "out"
        assert run(["plan", "--config", cfg, "--out", out]) == 0
        assert (out / "plan_auc_mean.csv").is_file()
        assert not (out / "plan_ce_mean.csv").exists()

    def test_circular_scenario_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR)
        assert run(["plan", "--config", cfg, "--out", tmp_path / "o"]) == 2


class TestProxyValidityFlag:
    def test_upward_trend_flags_ce_runs_only(self):
        assert proxy_validity_flags("ce", [0.30, 0.32, 0.35]) == ["below proxy-validity size"]
        assert proxy_validity_flags("ce", [0.35, 0.30]) == []
        assert proxy_validity_flags("auc", [0.30, 0.35]) == []
        assert proxy_validity_flags("ce", [0.30]) == []


class TestField:
    def test_covariance_diagnostic_and_round_trip(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR.replace("sigma_s_db = 0.0", "sigma_s_db = 8.0"))
        out = tmp_path / "out"
        assert run(["field", "--config", cfg, "--out", out]) == 0
        rows = np.loadtxt(out / "field_cov.csv", delimiter=",", skiprows=1)
        lags = rows[:, 0]
        assert lags[0] == 0.0
        assert 75.0 in lags  # decorrelation-distance row present
        theory_at_dc = rows[lags == 75.0, 2][0]
        np.testing.assert_allclose(theory_at_dc, 64.0 * np.exp(-1.0))
        np.testing.assert_allclose(rows[0, 2], 64.0)

        loaded = load_field(out / "field_bs0.csv")
        scenario = build_scenario(load_config(cfg).scenario)
        regenerated = generate_fields(scenario, ChannelParams(sigma_s_db=8.0), 0)[0]
        np.testing.assert_array_equal(loaded.values, regenerated.values)

        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_realizations"] == 25
        assert summary["max_rel_err"] >= 0.0

    def test_zero_shadowing_reports_absolute_gap(self, tmp_path):
        # theory curve is identically zero, so rel_err must not divide by it
        cfg = write_cfg(tmp_path, CIRCULAR)
        out = tmp_path / "out"
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert run(["field", "--config", cfg, "--out", out]) == 0
        rows = np.loadtxt(out / "field_cov.csv", delimiter=",", skiprows=1)
        assert np.all(np.isfinite(rows))
        np.testing.assert_array_equal(rows[:, 1:], 0.0)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["max_rel_err"] == 0.0


class TestExitCodes:
    def test_missing_config_is_config_error(self, tmp_path):
        assert run(["roc", "--config", tmp_path / "absent.cfg", "--out", tmp_path]) == 2

    def test_bad_key_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path, CIRCULAR + "\n[nn]\nepochs = soon\n")
        assert run(["roc", "--config", cfg, "--out", tmp_path / "o"]) == 2

    def test_divergence_is_numeric_error(self, tmp_path, capsys, monkeypatch):
        from irlv.mlp import TrainingDivergedError

        def blow_up(*args, **kwargs):
            raise TrainingDivergedError("training diverged")

        monkeypatch.setattr("irlv.cli.train", blow_up)
        cfg = write_cfg(tmp_path, CIRCULAR)
        assert run(["roc", "--config", cfg, "--out", tmp_path / "o"]) == 3
        assert "numeric failure" in capsys.readouterr().err

    def test_degenerate_data_is_numeric_error(self, tmp_path, capsys, monkeypatch):
        def degenerate(*args, **kwargs):
            raise ValueError("feature 0 has zero variance")

        monkeypatch.setattr("irlv.cli.normalize", degenerate)
        cfg = write_cfg(tmp_path, CIRCULAR)
        assert run(["roc", "--config", cfg, "--out", tmp_path / "o"]) == 3
        assert "numeric failure" in capsys.readouterr().err
