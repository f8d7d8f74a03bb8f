"""Typed configuration models for model, objective, training and whole runs"""

import hashlib
import json
import math
from typing import Any, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..utils.constants import VOCAB_SIZE, ObjectiveMode
from ..utils.exceptions import ConfigError

C = TypeVar("C", bound="StrictConfig")


class StrictConfig(BaseModel):
    """Immutable config; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid", frozen=True, validate_default=True)

    @classmethod
    def parse(cls: Type[C], data: Dict[str, Any]) -> C:
        """Validate ``data``; pydantic errors become ``ConfigError``."""
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
            raise ConfigError(f"invalid {cls.__name__}: {'; '.join(problems)}", {"errors": problems})

    def updated(self: C, **changes: Any) -> C:
        """Copy with ``changes`` applied and re-validated."""
        return type(self).parse({**self.model_dump(), **changes})


class ModelConfig(StrictConfig):
    """Shape of the dual-head transformer"""

    d_model: int = Field(default=64, gt=0)
    n_layers: int = Field(default=2, gt=0)
    n_heads: int = Field(default=2, gt=0)
    max_seq_len: int = Field(default=128, ge=2)
    vocab_size: int = Field(default=VOCAB_SIZE)
    seed: int = 0

    @field_validator("vocab_size")
    @classmethod
    def covers_byte_vocab(cls, v: int) -> int:
        if v < VOCAB_SIZE:
            raise ValueError(f"vocab_size must be at least {VOCAB_SIZE} (256 bytes + PAD, BOS, SEP)")
        return v

    @model_validator(mode="after")
    def heads_divide_width(self) -> "ModelConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"n_heads ({self.n_heads}) must divide d_model ({self.d_model})")
        return self

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    def parameter_count(self) -> int:
        """V*d + S*d + L*(12d^2 + 13d) + 2d + (d + 1) + (d*V + V)."""
        d, V, S, L = self.d_model, self.vocab_size, self.max_seq_len, self.n_layers
        return V * d + S * d + L * (12 * d * d + 13 * d) + 2 * d + (d + 1) + (d * V + V)


class HybridConfig(StrictConfig):
    """Weights of the combined objective L_s + alpha * L_P"""

    alpha: float = 0.2
    tau: float = Field(default=0.1, gt=0)
    allow_negative: bool = False

    @model_validator(mode="after")
    def check_alpha(self) -> "HybridConfig":
        if not math.isfinite(self.alpha) or not math.isfinite(self.tau):
            raise ValueError("alpha and tau must be finite")
        if self.alpha < 0 and not self.allow_negative:
            raise ValueError(f"alpha must be >= 0, got {self.alpha} (pass allow_negative to override)")
        return self


class TrainConfig(StrictConfig):
    """Optimizer, schedule and selection settings"""

    lr: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=16, ge=1)
    max_steps: int = Field(default=2000, ge=0)
    eval_every_frac: float = Field(default=0.025, gt=0, le=1)
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-5, gt=0)
    weight_decay: float = Field(default=0.0, ge=0)
    max_grad_norm: Optional[float] = Field(default=1.0, gt=0)
    seed: int = 0
    hybrid: HybridConfig = Field(default_factory=HybridConfig)
    early_stop_patience: Optional[int] = Field(default=10, ge=1)
    mode: Optional[ObjectiveMode] = None

    @model_validator(mode="after")
    def check_mode(self) -> "TrainConfig":
        if self.mode == ObjectiveMode.DPO and self.hybrid.alpha <= 0:
            raise ValueError("dpo mode needs alpha > 0")
        return self

    @property
    def objective_mode(self) -> ObjectiveMode:
        """Explicit mode, else hybrid; a hybrid objective with alpha == 0 is the baseline."""
        mode = self.mode or ObjectiveMode.HYBRID
        if mode == ObjectiveMode.HYBRID and self.hybrid.alpha == 0:
            return ObjectiveMode.BASELINE
        return mode

    @property
    def eval_every(self) -> int:
        # tolerance keeps 0.025 * 2000 at 50 despite binary rounding
        return max(1, math.ceil(self.eval_every_frac * self.max_steps - 1e-9))


class RunConfig(StrictConfig):
    """Everything needed to replay a command"""

    command: str
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    data: List[str] = Field(default_factory=list)
    test_frac: float = Field(default=0.1, ge=0, lt=1)
    val_frac: float = Field(default=0.05, ge=0, lt=1)
    groups: Dict[str, str] = Field(default_factory=dict)
    out_dir: Optional[str] = None
    options: Dict[str, Any] = Field(default_factory=dict)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return config_hash(self)


def config_hash(config: BaseModel) -> str:
    """SHA-256 of a config's sorted-key JSON dump."""
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
