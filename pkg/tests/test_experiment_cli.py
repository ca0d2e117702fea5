"""Experiment harness and command-line interface."""

import numpy as np
import pytest

from sitc.cli import ConfigError, main, parse_config
from sitc.experiment import (
    METRIC_COLUMNS,
    ExperimentConfig,
    default_acceptance_config,
    emit_report,
    run_experiment,
    run_single,
)

TINY = ExperimentConfig(n_list=(12,), seeds=(0, 1), kappa=0.8,
                        eta_rule="paper", timing="zero")


class TestConfig:
    def test_defaults_are_the_pinned_acceptance_setup(self):
        cfg = default_acceptance_config()
        assert cfg.regime == "orthogonal_bounded_means"
        assert cfg.t == 3 and cfg.r == 1
        assert cfg.kappa == 0.6
        assert cfg.n_list == (40, 80, 160)
        assert cfg.eta_sweep == (0.5, 1.0, 2.0, 4.0)
        assert len(cfg.seeds) == 5
        assert not cfg.validate()

    def test_validation_lists_every_problem(self):
        cfg = ExperimentConfig(regime="nope", t=2, n_list=(), r=0, kappa=-1,
                               noise_amplitude=2.0, seeds=())
        problems = cfg.validate()
        assert len(problems) >= 6

    def test_run_experiment_rejects_invalid(self):
        with pytest.raises(ValueError, match="invalid experiment config"):
            run_experiment(ExperimentConfig(regime="nope"))

    def test_parse_round_trip(self):
        text = """
        # comment
        regime = orthogonal_zero_means
        n_list = 10, 20
        kappa = 0.8
        seeds = 3, 4, 5
        eta_rule = paper
        eta_c = 2.0
        noise_amplitude = 0.05
        usvt = true
        """
        cfg = parse_config(text)
        assert cfg.regime == "orthogonal_zero_means"
        assert cfg.n_list == (10, 20)
        assert cfg.seeds == (3, 4, 5)
        assert cfg.eta_c == 2.0
        assert cfg.usvt is True

    def test_parse_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("regime = xor_hardness\nbogus = 3\n")

    def test_parse_rejects_bad_value(self):
        with pytest.raises(ConfigError, match="bad value"):
            parse_config("kappa = fast\n")


class TestRun:
    def test_rows_have_all_columns(self):
        rows = run_experiment(TINY)
        assert len(rows) == 2
        for row in rows:
            assert set(METRIC_COLUMNS) <= set(row)
            assert np.isfinite(row["max_err"])
            assert np.isfinite(row["mse"])

    def test_deterministic_rows(self):
        a = run_experiment(TINY)
        b = run_experiment(TINY)
        assert a == b

    def test_jobs_do_not_change_results(self):
        a = run_experiment(TINY, jobs=1)
        b = run_experiment(TINY, jobs=2)
        assert a == b

    def test_zero_means_regime_recovers_with_combination_weights(self):
        cfg = ExperimentConfig(regime="orthogonal_zero_means", n_list=(14,),
                               seeds=(0,), kappa=1.0, eta_rule="paper", timing="zero")
        row = run_single(cfg, 14, 0)
        assert np.isfinite(row["cond"])

    def test_xor_regime_runs_with_gap_rule(self):
        cfg = ExperimentConfig(regime="xor_hardness", n_list=(12,), seeds=(0,),
                               kappa=0.8, bias=0.3, eta_rule="gap", timing="zero")
        row = run_single(cfg, 12, 0)
        assert row["cond"] == 1.0

    def test_usvt_column(self):
        cfg = ExperimentConfig(n_list=(12,), seeds=(0,), kappa=0.8,
                               eta_rule="paper", usvt=True, timing="zero")
        row = run_single(cfg, 12, 0)
        assert row["usvt_err"] is not None and np.isfinite(row["usvt_err"])


class TestReport:
    def test_files_and_shape(self, tmp_path):
        rows = run_experiment(TINY)
        paths = emit_report(rows, tmp_path)
        text = paths["metrics"].read_text().splitlines()
        assert text[0] == ",".join(METRIC_COLUMNS)
        assert len(text) == 3  # header + 2 rows
        agg = paths["aggregate"].read_text().splitlines()
        assert len(agg) == 2  # header + one n value
        svg = paths["plot"].read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_byte_identical_rerun(self, tmp_path):
        emit_report(run_experiment(TINY), tmp_path / "a")
        emit_report(run_experiment(TINY), tmp_path / "b")
        assert (tmp_path / "a/metrics.csv").read_bytes() == \
               (tmp_path / "b/metrics.csv").read_bytes()
        assert (tmp_path / "a/aggregate.csv").read_bytes() == \
               (tmp_path / "b/aggregate.csv").read_bytes()
        assert (tmp_path / "a/error_vs_n.svg").read_bytes() == \
               (tmp_path / "b/error_vs_n.svg").read_bytes()

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path)


class TestCli:
    def write_cfg(self, tmp_path, body):
        path = tmp_path / "exp.cfg"
        path.write_text(body)
        return str(path)

    def test_run_success(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, "n_list = 12\nkappa = 0.8\nseeds = 0\neta_rule = paper\n")
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "out"),
                     "--no-timing"])
        assert code == 0
        assert (tmp_path / "out/metrics.csv").exists()
        assert (tmp_path / "out/error_vs_n.svg").exists()

    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.cfg")]) == 1

    def test_invalid_field_is_config_error(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, "kappa = -3\nseeds = 0\nn_list = 12\n")
        assert main(["run", "--config", cfg]) == 1
        assert "kappa" in capsys.readouterr().err

    def test_unknown_key_is_config_error(self, tmp_path):
        cfg = self.write_cfg(tmp_path, "explode = yes\n")
        assert main(["run", "--config", cfg]) == 1

    def test_oracle_check(self, capsys):
        assert main(["oracle-check", "--n", "7", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 3

    def test_hardness(self, capsys):
        assert main(["hardness", "--n", "100", "--bias", "0.0", "--seeds", "5"]) == 0
        assert "median" in capsys.readouterr().out

    def test_repo_config_parses(self):
        with open("configs/acceptance.cfg") as fh:
            cfg = parse_config(fh.read())
        assert not cfg.validate()
        assert cfg.n_list == (40, 80, 160)
