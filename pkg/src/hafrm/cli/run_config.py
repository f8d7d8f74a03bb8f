"""Resolving a RunConfig from an optional JSON file plus command-line flags (flags win)"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..config.schemas import RunConfig
from ..config.settings import resolve_seed
from ..utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

# flag dest -> (section, key); section None means top level
FLAG_MAP = {
    "d_model": ("model", "d_model"),
    "n_layers": ("model", "n_layers"),
    "n_heads": ("model", "n_heads"),
    "max_seq_len": ("model", "max_seq_len"),
    "lr": ("train", "lr"),
    "batch_size": ("train", "batch_size"),
    "max_steps": ("train", "max_steps"),
    "eval_every_frac": ("train", "eval_every_frac"),
    "weight_decay": ("train", "weight_decay"),
    "max_grad_norm": ("train", "max_grad_norm"),
    "patience": ("train", "early_stop_patience"),
    "mode": ("train", "mode"),
    "alpha": ("hybrid", "alpha"),
    "tau": ("hybrid", "tau"),
    "test_frac": (None, "test_frac"),
    "val_frac": (None, "val_frac"),
}


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {p} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {p} must hold a JSON object")
    data.pop("command", None)
    return data


def build_run_config(args: argparse.Namespace, command: str, **extra: Any) -> RunConfig:
    """Merge config file, flags and ``extra`` top-level fields; resolve the seed."""
    data = read_config_file(getattr(args, "config", None))
    model = dict(data.get("model") or {})
    train = dict(data.get("train") or {})
    hybrid = dict(train.get("hybrid") or {})
    top: Dict[str, Any] = {k: v for k, v in data.items() if k not in ("model", "train")}
    sections = {"model": model, "train": train, "hybrid": hybrid, None: top}

    for dest, (section, key) in FLAG_MAP.items():
        value = getattr(args, dest, None)
        if value is not None:
            sections[section][key] = value
    if getattr(args, "allow_negative", False):
        hybrid["allow_negative"] = True

    seed = resolve_seed(getattr(args, "seed", None), train.get("seed"))
    train["seed"] = seed
    model["seed"] = seed
    train["hybrid"] = hybrid
    top.update({k: v for k, v in extra.items() if v is not None})

    config = RunConfig.parse({**top, "command": command, "model": model, "train": train})
    logger.debug(f"resolved {command} config {config.content_hash()[:12]}")
    return config


def write_config(config: RunConfig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")
    return path
