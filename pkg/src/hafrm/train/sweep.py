"""Policy-ratio sweep: one fit per alpha on identical data, seed and initialization"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from ..config.schemas import ModelConfig, TrainConfig
from ..data.splits import DatasetSplit
from ..model.transformer import DualHeadModel
from ..utils.exceptions import ConfigError
from .trainer import FitResult, fit

logger = logging.getLogger(__name__)


def alpha_label(alpha: float) -> str:
    return f"alpha={alpha:g}"


@dataclass
class SweepResult:
    """Per-alpha fits plus margin and accuracy series on a shared step grid."""

    alphas: List[float]
    runs: Dict[float, FitResult]
    steps: List[int]
    margin_series: Dict[float, List[Optional[float]]] = field(default_factory=dict)
    accuracy_series: Dict[float, List[Optional[float]]] = field(default_factory=dict)

    def summary(self) -> List[dict]:
        rows = []
        for alpha in self.alphas:
            run = self.runs[alpha]
            final = run.log.evals[-1]
            rows.append({
                "alpha": alpha,
                "mode": run.log.header["mode"],
                "negative_alpha": alpha < 0,
                "best_step": run.best.step,
                "best_val_accuracy": run.best.val_accuracy,
                "best_val_margin": run.best_margin,
                "final_step": run.final_step,
                "final_val_accuracy": final["val_accuracy"],
                "stopped_early": run.stopped_early,
            })
        return rows


def alpha_sweep(
    data: DatasetSplit,
    base_cfg: TrainConfig,
    alphas: Sequence[float],
    model_cfg: ModelConfig,
    out_dir: Optional[Union[str, Path]] = None,
) -> SweepResult:
    """Run ``fit`` once per alpha from the same initial parameters.

    alpha == 0 resolves to the baseline objective. Series are aligned on the
    union of validation steps; a run that stopped early leaves later cells empty.
    """
    if not alphas:
        raise ConfigError("alpha_sweep needs at least one alpha")
    if len(set(alphas)) != len(alphas):
        raise ConfigError(f"duplicate alphas in {list(alphas)}")
    out_dir = Path(out_dir) if out_dir is not None else None
    runs: Dict[float, FitResult] = {}
    for alpha in alphas:
        hybrid = base_cfg.hybrid.updated(alpha=alpha)
        cfg = base_cfg.updated(hybrid=hybrid.model_dump(), mode=None)
        if alpha < 0:
            logger.warning(f"alpha={alpha} is negative: the policy loss is being maximized")
        model = DualHeadModel(model_cfg)
        run_dir = out_dir / alpha_label(alpha) if out_dir is not None else None
        runs[alpha] = fit(model, data, cfg, run_dir)

    steps = sorted({s for run in runs.values() for s in run.log.eval_steps()})
    result = SweepResult(alphas=list(alphas), runs=runs, steps=steps)
    for alpha, run in runs.items():
        margins = run.log.eval_series("val_margin")
        accuracies = run.log.eval_series("val_accuracy")
        result.margin_series[alpha] = [margins.get(s) for s in steps]
        result.accuracy_series[alpha] = [accuracies.get(s) for s in steps]
    return result
