from .settings import HafrmSettings, get_settings, resolve_seed
from .schemas import StrictConfig, ModelConfig, HybridConfig, TrainConfig, RunConfig, config_hash

__all__ = [
    "HafrmSettings",
    "get_settings",
    "resolve_seed",
    "StrictConfig",
    "ModelConfig",
    "HybridConfig",
    "TrainConfig",
    "RunConfig",
    "config_hash",
]
