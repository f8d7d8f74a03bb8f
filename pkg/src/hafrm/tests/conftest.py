"""
Pytest configuration and shared fixtures for hafrm tests.
"""

import json
import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")

import numpy as np
import pytest

from hafrm.config import ModelConfig, TrainConfig, HybridConfig, get_settings
from hafrm.data import PreferenceRecord, synth_generate, write_jsonl
from hafrm.model import DualHeadModel


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Isolate tests from a developer's HAFRM_SEED and cached settings."""
    monkeypatch.delenv("HAFRM_SEED", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def tiny_config():
    """One block, narrow: fast enough for per-test forward passes."""
    return ModelConfig(d_model=16, n_layers=1, n_heads=2, max_seq_len=64, seed=0)


@pytest.fixture
def toy_config():
    """The two-layer, width-32 model used for gradient checks."""
    return ModelConfig(d_model=32, n_layers=2, n_heads=2, max_seq_len=48, seed=0)


@pytest.fixture
def tiny_model(tiny_config):
    return DualHeadModel(tiny_config)


@pytest.fixture
def quick_train_config():
    return TrainConfig(
        lr=3e-3,
        batch_size=8,
        max_steps=12,
        eval_every_frac=0.25,
        seed=0,
        hybrid=HybridConfig(alpha=0.2, tau=0.1),
        early_stop_patience=None,
    )


@pytest.fixture
def marker_records():
    return synth_generate("marker-count", 60, 0).records


@pytest.fixture
def safety_records():
    return synth_generate("keyword-safety", 60, 1).records


@pytest.fixture
def make_record():
    """Factory for hand-written records."""

    def _make(i=0, prompt="pick one", chosen="good answer", rejected="bad answer", source="hand"):
        return PreferenceRecord(id=f"r{i}", prompt=prompt, chosen=chosen, rejected=rejected, source=source)

    return _make


@pytest.fixture
def write_lines(tmp_path):
    """Write raw JSONL lines (dicts or strings) to a file under tmp_path."""

    def _write(name, rows):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            for row in rows:
                f.write((row if isinstance(row, str) else json.dumps(row)) + "\n")
        return path

    return _write


@pytest.fixture
def marker_file(tmp_path, marker_records):
    return write_jsonl(marker_records, tmp_path / "marker.jsonl")
