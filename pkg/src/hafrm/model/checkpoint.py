"""Versioned checkpoint files.

A checkpoint is one JSON document::

    {"format": "hafrm-ckpt-v1", "config": {...}, "config_hash": "...",
     "step": 120, "val_accuracy": 0.97,
     "params": {"tok_emb": {"shape": [259, 64], "dtype": "<f8", "data": "<base64>"}, ...},
     "optim": {"step": 120, "m": {...}, "v": {...}} | null,
     "meta": {...}}

Arrays are stored as little-endian float64 bytes, so a reload is bit-exact.
"""

import base64
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..config.schemas import ModelConfig, config_hash
from ..utils.constants import CHECKPOINT_FORMAT
from ..utils.exceptions import CheckpointError, ConfigError
from .transformer import DualHeadModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_DTYPE = "<f8"


@dataclass
class Checkpoint:
    """Model parameters plus the training state they were selected at"""

    model: DualHeadModel
    step: int = 0
    val_accuracy: Optional[float] = None
    config_hash: Optional[str] = None
    optim: Optional[Dict[str, Any]] = None
    meta: Dict[str, Any] = field(default_factory=dict)


def encode_array(arr: np.ndarray) -> Dict[str, Any]:
    data = np.ascontiguousarray(arr, dtype=_DTYPE)
    return {"shape": list(data.shape), "dtype": _DTYPE, "data": base64.b64encode(data.tobytes()).decode("ascii")}


def decode_array(blob: Dict[str, Any]) -> np.ndarray:
    if blob.get("dtype") != _DTYPE:
        raise CheckpointError(f"unsupported array dtype {blob.get('dtype')!r}")
    raw = base64.b64decode(blob["data"])
    arr = np.frombuffer(raw, dtype=_DTYPE).astype(np.float64)
    return arr.reshape(tuple(blob["shape"]))


def _encode_optim(optim: Optional[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
    if optim is None:
        return None
    return {
        "step": int(optim["step"]),
        "m": {k: encode_array(v) for k, v in optim["m"].items()},
        "v": {k: encode_array(v) for k, v in optim["v"].items()},
    }


def _decode_optim(blob: Optional[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
    if blob is None:
        return None
    return {
        "step": int(blob["step"]),
        "m": {k: decode_array(v) for k, v in blob["m"].items()},
        "v": {k: decode_array(v) for k, v in blob["v"].items()},
    }


def save_checkpoint(path: PathLike, ckpt: Checkpoint) -> Path:
    """Write ``ckpt`` to ``path`` atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    model = ckpt.model
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": model.config.model_dump(mode="json"),
        "config_hash": ckpt.config_hash or config_hash(model.config),
        "step": int(ckpt.step),
        "val_accuracy": ckpt.val_accuracy,
        "params": {name: encode_array(t.data) for name, t in model.named_parameters()},
        "optim": _encode_optim(ckpt.optim),
        "meta": ckpt.meta,
    }
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True)
    os.replace(tmp, path)
    logger.debug(f"checkpoint written: {path} (step {ckpt.step})")
    return path


def load_checkpoint(path: PathLike, trainable: bool = False) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``.

    Raises:
        CheckpointError: If the file is missing, unreadable or has another format tag
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}", str(path))
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}", str(path))

    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt != CHECKPOINT_FORMAT:
        raise CheckpointError(f"checkpoint {path} has format {fmt!r}, expected {CHECKPOINT_FORMAT!r}", str(path))
    try:
        config = ModelConfig.parse(doc["config"])
        params = {name: decode_array(blob) for name, blob in doc["params"].items()}
        model = DualHeadModel(config, params, trainable=trainable)
        optim = _decode_optim(doc.get("optim"))
    except (KeyError, TypeError, ValueError, ConfigError) as e:
        raise CheckpointError(f"checkpoint {path} is malformed: {e}", str(path))

    return Checkpoint(
        model=model,
        step=int(doc.get("step", 0)),
        val_accuracy=doc.get("val_accuracy"),
        config_hash=doc.get("config_hash"),
        optim=optim,
        meta=doc.get("meta") or {},
    )
