"""
Unit tests for typed configs, environment settings, seed resolution and run directories.
"""

import argparse
import logging

import pytest

from hafrm.cli.parser import build_parser
from hafrm.cli.run_config import build_run_config
from hafrm.cli.run_dir import LOCK_NAME, RunDirectory
from hafrm.config import HybridConfig, ModelConfig, RunConfig, TrainConfig, config_hash, get_settings, resolve_seed
from hafrm.utils.constants import ObjectiveMode, VOCAB_SIZE
from hafrm.utils.exceptions import ConfigError

pytestmark = pytest.mark.unit


class TestModelConfig:
    def test_defaults(self):
        cfg = ModelConfig()
        assert (cfg.d_model, cfg.n_layers, cfg.n_heads, cfg.max_seq_len) == (64, 2, 2, 128)
        assert cfg.vocab_size == VOCAB_SIZE
        assert cfg.head_dim == 32

    def test_heads_must_divide_width(self):
        with pytest.raises(ConfigError):
            ModelConfig.parse({"d_model": 30, "n_heads": 4})

    def test_vocab_must_cover_bytes(self):
        with pytest.raises(ConfigError):
            ModelConfig.parse({"vocab_size": 256})

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            ModelConfig.parse({"width": 3})
        assert "width" in str(exc.value)

    def test_parameter_count_by_hand(self):
        # d=16, L=1, S=64, V=259
        cfg = ModelConfig(d_model=16, n_layers=1, n_heads=2, max_seq_len=64)
        expected = 259 * 16 + 64 * 16 + (12 * 16 * 16 + 13 * 16) + 2 * 16 + 17 + (16 * 259 + 259)
        assert cfg.parameter_count() == expected


class TestObjectiveConfigs:
    def test_negative_alpha_needs_opt_in(self):
        with pytest.raises(ConfigError):
            HybridConfig.parse({"alpha": -0.1})
        assert HybridConfig.parse({"alpha": -0.1, "allow_negative": True}).alpha == -0.1

    def test_tau_must_be_positive(self):
        with pytest.raises(ConfigError):
            HybridConfig.parse({"tau": 0.0})

    def test_non_finite_alpha(self):
        with pytest.raises(ConfigError):
            HybridConfig.parse({"alpha": float("nan")})

    def test_objective_mode(self):
        assert TrainConfig().objective_mode == ObjectiveMode.HYBRID
        assert TrainConfig(hybrid=HybridConfig(alpha=0.0)).objective_mode == ObjectiveMode.BASELINE
        assert TrainConfig(mode=ObjectiveMode.BASELINE).objective_mode == ObjectiveMode.BASELINE

    def test_dpo_needs_positive_alpha(self):
        with pytest.raises(ConfigError):
            TrainConfig.parse({"mode": "dpo", "hybrid": {"alpha": 0.0}})

    def test_eval_every_rounds_up(self):
        assert TrainConfig(max_steps=2000, eval_every_frac=0.025).eval_every == 50
        assert TrainConfig(max_steps=10, eval_every_frac=0.25).eval_every == 3
        assert TrainConfig(max_steps=0).eval_every == 1

    def test_updated_revalidates(self):
        cfg = TrainConfig()
        assert cfg.updated(lr=0.5).lr == 0.5
        with pytest.raises(ConfigError):
            cfg.updated(lr=-1.0)


class TestRunConfig:
    def test_hash_is_stable_and_content_based(self):
        a = RunConfig(command="train", data=["x.jsonl"])
        b = RunConfig.parse({"data": ["x.jsonl"], "command": "train"})
        assert a.content_hash() == b.content_hash() == config_hash(a)
        assert a.content_hash() != RunConfig(command="train", data=["y.jsonl"]).content_hash()

    def test_frozen(self):
        cfg = RunConfig(command="stats")
        with pytest.raises(Exception):
            cfg.command = "train"


class TestSettings:
    def test_seed_precedence(self, monkeypatch):
        assert resolve_seed(None, None) == 0
        assert resolve_seed(None, 4) == 4
        monkeypatch.setenv("HAFRM_SEED", "11")
        get_settings.cache_clear()
        assert resolve_seed(None, 4) == 11
        assert resolve_seed(2, 4) == 2

    def test_invalid_seed(self, monkeypatch):
        monkeypatch.setenv("HAFRM_SEED", "eleven")
        with pytest.raises(ConfigError):
            get_settings()

    def test_log_level_is_upper_cased(self, monkeypatch):
        monkeypatch.setenv("HAFRM_LOG_LEVEL", "debug")
        assert get_settings().log_level == "DEBUG"

    def test_unknown_exporter(self, monkeypatch):
        monkeypatch.setenv("OTEL_EXPORTER", "zipkin")
        with pytest.raises(ValueError):
            get_settings()


class TestBuildRunConfig:
    def _args(self, *argv):
        return build_parser().parse_args(["train", *argv])

    def test_flags_land_in_their_sections(self):
        args = self._args("--d-model", "32", "--lr", "0.01", "--alpha", "0.3", "--tau", "0.2", "--test-frac", "0.2", "--patience", "3")
        cfg = build_run_config(args, "train")
        assert cfg.model.d_model == 32
        assert cfg.train.lr == 0.01
        assert cfg.train.hybrid.alpha == 0.3
        assert cfg.train.hybrid.tau == 0.2
        assert cfg.train.early_stop_patience == 3
        assert cfg.test_frac == 0.2

    def test_seed_goes_to_model_and_train(self):
        cfg = build_run_config(self._args("--seed", "13"), "train")
        assert cfg.model.seed == cfg.train.seed == 13

    def test_allow_negative(self):
        with pytest.raises(ConfigError):
            build_run_config(self._args("--alpha", "-0.2"), "train")
        cfg = build_run_config(self._args("--alpha", "-0.2", "--allow-negative"), "train")
        assert cfg.train.hybrid.allow_negative

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            build_run_config(self._args("--config", str(tmp_path / "none.json")), "train")

    def test_config_file_must_be_an_object(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            build_run_config(self._args("--config", str(path)), "train")

    def test_namespace_without_flags(self):
        cfg = build_run_config(argparse.Namespace(), "stats")
        assert cfg.command == "stats"
        assert cfg.train.seed == 0


class TestRunDirectory:
    def test_lock_is_held_then_released(self, tmp_path):
        with RunDirectory(tmp_path / "run") as path:
            assert (path / LOCK_NAME).is_file()
        assert not (tmp_path / "run" / LOCK_NAME).exists()

    def test_non_empty_needs_force(self, tmp_path):
        run = tmp_path / "run"
        run.mkdir()
        (run / "old.txt").write_text("x")
        with pytest.raises(ConfigError):
            with RunDirectory(run):
                pass
        with RunDirectory(run, force=True):
            pass
        assert (run / "old.txt").is_file()

    def test_force_warns_only_when_replacing(self, caplog, tmp_path):
        run = tmp_path / "run"
        run.mkdir()
        with caplog.at_level(logging.WARNING, logger="hafrm.cli.run_dir"):
            with RunDirectory(run, force=True):
                pass
            assert not caplog.records
            (run / "old.txt").write_text("x")
            with RunDirectory(run, force=True):
                pass
        assert len(caplog.records) == 1
        assert "non-empty" in caplog.records[0].getMessage()

    def test_existing_lock_is_refused_even_with_force(self, tmp_path):
        run = tmp_path / "run"
        run.mkdir()
        (run / LOCK_NAME).write_text("123\n")
        with pytest.raises(ConfigError):
            with RunDirectory(run, force=True):
                pass

    def test_lock_released_on_error(self, tmp_path):
        with pytest.raises(RuntimeError):
            with RunDirectory(tmp_path / "run"):
                raise RuntimeError("boom")
        assert not (tmp_path / "run" / LOCK_NAME).exists()

    def test_path_is_a_file(self, tmp_path):
        path = tmp_path / "file"
        path.write_text("x")
        with pytest.raises(ConfigError):
            with RunDirectory(path):
                pass
