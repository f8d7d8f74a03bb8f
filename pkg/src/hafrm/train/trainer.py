"""Training loop: hybrid-objective steps, periodic validation, checkpoint selection.

Randomness is drawn in a fixed order: model initialization from the model
config seed, then one permutation of the training set per epoch from
``default_rng([seed, epoch])``. Nothing inside a step is random, so the
baseline and hybrid trainers consume identical random streams.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Sequence, Union

import numpy as np
from opentelemetry import trace

from otel.metrics import record_checkpoint_saved, record_numeric_abort, record_train_step, record_validation

from ..config.schemas import TrainConfig, config_hash
from ..data.batching import PreferenceBatch, encode_records, iter_batches
from ..data.records import PreferenceRecord
from ..data.splits import DatasetSplit
from ..eval.accuracy import AccuracyReport, pairwise_accuracy
from ..eval.scorers import ImplicitRewardScorer, ModelScorer, Scorer
from ..losses.objectives import LossBreakdown, hybrid_loss
from ..model.checkpoint import Checkpoint, save_checkpoint
from ..model.transformer import DualHeadModel, snapshot_reference
from ..tensor_core import backward
from ..utils.constants import ObjectiveMode
from ..utils.exceptions import ContractError, NumericError
from .optim import AdamW, OptimState, clip_grad_norm

logger = logging.getLogger(__name__)
tracer = trace.get_tracer("hafrm-train")


def make_optimizer(model: DualHeadModel, cfg: TrainConfig, state: Optional[OptimState] = None) -> AdamW:
    return AdamW(
        dict(model.named_parameters()),
        lr=cfg.lr,
        betas=(cfg.adam_beta1, cfg.adam_beta2),
        eps=cfg.adam_eps,
        weight_decay=cfg.weight_decay,
        state=state,
    )


def train_step(
    model: DualHeadModel,
    reference: DualHeadModel,
    batch: PreferenceBatch,
    cfg: TrainConfig,
    optim: AdamW,
) -> LossBreakdown:
    """One forward/backward of the configured objective, clip, AdamW update.

    Raises:
        NumericError: Non-finite loss, gradient or parameter; details carry the batch ids
    """
    if batch.n_pairs == 0:
        raise ContractError("train_step needs a non-empty batch")
    if not model.trainable:
        raise ContractError("train_step needs a trainable model")
    params = dict(model.named_parameters())
    with tracer.start_as_current_span("train_step"):
        try:
            model.zero_grad()
            objective, breakdown = hybrid_loss(batch, model, reference, cfg.hybrid, cfg.objective_mode)
            backward(objective)
            _, norm = clip_grad_norm(params, cfg.max_grad_norm)
            optim.step()
            for name, p in params.items():
                if not np.all(np.isfinite(p.data)):
                    raise NumericError(f"parameter {name} became non-finite")
        except NumericError as e:
            raise NumericError(
                f"numeric failure on batch {list(batch.ids)}: {e.message}",
                {**e.details, "batch_ids": list(batch.ids)},
            )
    breakdown.grad_norm = norm
    return breakdown


@dataclass
class TrainLog:
    """Header, per-step loss entries and validation entries, all keyed by step."""

    header: Dict[str, Any] = field(default_factory=dict)
    steps: List[Dict[str, Any]] = field(default_factory=list)
    evals: List[Dict[str, Any]] = field(default_factory=list)
    _sink: Optional[IO[str]] = field(default=None, repr=False, compare=False)

    def _emit(self, entry: Dict[str, Any]) -> None:
        if self._sink is not None:
            self._sink.write(json.dumps(entry, sort_keys=True) + "\n")
            self._sink.flush()

    def start(self, header: Dict[str, Any]) -> None:
        self.header = header
        self._emit({"type": "header", **header})

    def add_step(self, step: int, breakdown: LossBreakdown) -> None:
        if self.steps and step <= self.steps[-1]["step"]:
            raise ContractError(f"train log steps must increase: {step} after {self.steps[-1]['step']}")
        entry = breakdown.to_log_entry(step)
        self.steps.append(entry)
        self._emit({"type": "step", **entry})

    def add_eval(self, step: int, report: AccuracyReport, improved: bool) -> None:
        if self.evals and step <= self.evals[-1]["step"]:
            raise ContractError(f"validation steps must increase: {step} after {self.evals[-1]['step']}")
        entry = {
            "step": step,
            "val_accuracy": report.accuracy,
            "val_margin": report.margin,
            "val_mean_reward": report.mean_chosen_reward,
            "improved": improved,
        }
        self.evals.append(entry)
        self._emit({"type": "eval", **entry})

    def eval_steps(self) -> List[int]:
        return [e["step"] for e in self.evals]

    def eval_series(self, key: str) -> Dict[int, float]:
        return {e["step"]: e[key] for e in self.evals}


@dataclass
class FitResult:
    best: Checkpoint
    log: TrainLog
    reference: DualHeadModel
    final_step: int
    stopped_early: bool = False

    @property
    def best_margin(self) -> Optional[float]:
        return self.log.eval_series("val_margin").get(self.best.step)


def validation_scorer(model: DualHeadModel, reference: DualHeadModel, mode: ObjectiveMode) -> Scorer:
    """Reward head, or the implicit reward for a model trained on the policy loss alone."""
    if mode == ObjectiveMode.DPO:
        return ImplicitRewardScorer(model, reference)
    return ModelScorer(model)


def _validate(scorer: Scorer, records: Sequence[PreferenceRecord]) -> AccuracyReport:
    start = time.perf_counter()
    report = pairwise_accuracy(scorer, records, dataset="validation")
    record_validation(report.accuracy, (time.perf_counter() - start) * 1000)
    return report


def fit(
    model: DualHeadModel,
    data: DatasetSplit,
    cfg: TrainConfig,
    run_dir: Optional[Union[str, Path]] = None,
) -> FitResult:
    """Train ``model`` in place and return the best validation checkpoint.

    Validation runs at step 0, every ``cfg.eval_every`` steps and at the last
    step. The best checkpoint has the highest validation accuracy (earliest
    step on ties). Training stops after ``early_stop_patience`` evaluations
    without improvement. With ``run_dir``, writes train_log.jsonl,
    checkpoints/step_N.ckpt on every improvement and best.ckpt.
    """
    if not data.train or not data.validation:
        raise ContractError("fit needs non-empty train and validation splits")
    run_dir = Path(run_dir) if run_dir is not None else None
    mode = cfg.objective_mode
    eval_every = cfg.eval_every
    header = {
        "mode": mode.value,
        "alpha": cfg.hybrid.alpha,
        "tau": cfg.hybrid.tau,
        "seed": cfg.seed,
        "max_steps": cfg.max_steps,
        "eval_every": eval_every,
        "n_train": len(data.train),
        "n_validation": len(data.validation),
        "model_config_hash": config_hash(model.config),
        "train_config_hash": config_hash(cfg),
    }

    sink = None
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)
        sink = open(run_dir / "train_log.jsonl", "w", encoding="utf-8")
    log = TrainLog(_sink=sink)

    try:
        with tracer.start_as_current_span("fit") as span:
            span.set_attribute("mode", mode.value)
            span.set_attribute("max_steps", cfg.max_steps)
            log.start(header)
            logger.info(
                f"fit: mode={mode.value} alpha={cfg.hybrid.alpha} steps={cfg.max_steps} "
                f"eval_every={eval_every} train={len(data.train)} val={len(data.validation)}"
            )

            reference = snapshot_reference(model)
            optim = make_optimizer(model, cfg)
            scorer = validation_scorer(model, reference, mode)

            def snapshot(step: int, accuracy: float) -> Checkpoint:
                ckpt = Checkpoint(
                    model=model.frozen_copy(),
                    step=step,
                    val_accuracy=accuracy,
                    config_hash=config_hash(model.config),
                    optim=optim.state.to_dict(),
                    meta={"mode": mode.value, "alpha": cfg.hybrid.alpha, "tau": cfg.hybrid.tau},
                )
                if run_dir is not None:
                    save_checkpoint(run_dir / "checkpoints" / f"step_{step}.ckpt", ckpt)
                    record_checkpoint_saved("step")
                return ckpt

            report = _validate(scorer, data.validation)
            best = snapshot(0, report.accuracy)
            log.add_eval(0, report, improved=True)
            logger.info(f"step 0: val_accuracy={report.accuracy:.4f}")

            step = 0
            epoch = 0
            since_best = 0
            stopped_early = False
            n_train = len(data.train)
            while step < cfg.max_steps and not stopped_early:
                order = np.random.default_rng([cfg.seed, epoch]).permutation(n_train)
                epoch += 1
                for chunk in iter_batches([data.train[int(i)] for i in order], cfg.batch_size):
                    if step >= cfg.max_steps:
                        break
                    batch = encode_records(chunk, model.config)
                    try:
                        breakdown = train_step(model, reference, batch, cfg, optim)
                    except NumericError:
                        record_numeric_abort(step + 1)
                        raise
                    step += 1
                    log.add_step(step, breakdown)
                    record_train_step(mode.value, breakdown.objective)
                    logger.debug(
                        f"step {step}: l_s={breakdown.l_s:.6f} l_p={breakdown.l_p:.6f} "
                        f"margin={breakdown.margin:.4f} grad_norm={breakdown.grad_norm:.4f}"
                    )

                    if step % eval_every != 0 and step != cfg.max_steps:
                        continue
                    report = _validate(scorer, data.validation)
                    improved = report.accuracy > best.val_accuracy
                    log.add_eval(step, report, improved=improved)
                    if improved:
                        best = snapshot(step, report.accuracy)
                        since_best = 0
                        logger.info(f"step {step}: val_accuracy={report.accuracy:.4f} (new best)")
                    else:
                        since_best += 1
                        logger.info(f"step {step}: val_accuracy={report.accuracy:.4f} (best {best.val_accuracy:.4f} at {best.step})")
                    if cfg.early_stop_patience is not None and since_best >= cfg.early_stop_patience:
                        logger.info(f"early stop at step {step}: no improvement in {since_best} evaluation(s)")
                        stopped_early = True
                        break

            if run_dir is not None:
                save_checkpoint(run_dir / "best.ckpt", best)
                record_checkpoint_saved("best")
            logger.info(f"fit done at step {step}: best val_accuracy={best.val_accuracy:.4f} at step {best.step}")
            return FitResult(best=best, log=log, reference=reference, final_step=step, stopped_early=stopped_early)
    finally:
        if sink is not None:
            sink.close()
