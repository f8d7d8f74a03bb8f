from .optim import AdamW, OptimState, clip_grad_norm, global_grad_norm
from .trainer import FitResult, TrainLog, fit, make_optimizer, train_step, validation_scorer
from .sweep import SweepResult, alpha_label, alpha_sweep

__all__ = [
    "AdamW",
    "OptimState",
    "clip_grad_norm",
    "global_grad_norm",
    "FitResult",
    "TrainLog",
    "fit",
    "make_optimizer",
    "train_step",
    "validation_scorer",
    "SweepResult",
    "alpha_label",
    "alpha_sweep",
]
