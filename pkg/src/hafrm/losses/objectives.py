"""Reward loss, DPO policy loss and the hybrid objective L_s + alpha * L_P.

All three reduce over pairs with the arithmetic mean. Sequence log-probs are
sums over response tokens. tau multiplies the log-ratio difference inside the
sigmoid.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..config.schemas import HybridConfig
from ..data.batching import PreferenceBatch
from ..model.transformer import DualHeadModel
from ..tensor_core import Tensor, as_tensor, log_sigmoid, no_grad
from ..utils.constants import ObjectiveMode
from ..utils.exceptions import ContractError, NumericError, ShapeError

logger = logging.getLogger(__name__)


def _pairwise(a: Any, b: Any, what: str) -> Tuple[Tensor, Tensor]:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"{what}: per-pair inputs differ in shape", a.shape, b.shape)
    if a.size == 0:
        raise ContractError(f"{what}: empty batch")
    return a, b


def reward_loss(r_w: Any, r_l: Any) -> Tensor:
    """mean over pairs of -log sigma(r_w - r_l)."""
    r_w, r_l = _pairwise(r_w, r_l, "reward_loss")
    return -log_sigmoid(r_w - r_l).mean()


def policy_loss_dpo(logp_w: Any, logp_l: Any, ref_logp_w: Any, ref_logp_l: Any, tau: float = 0.1) -> Tensor:
    """mean over pairs of -log sigma(tau * (pd_win - pd_lose)), pd = log pi - log pi_ref.

    Raises:
        NumericError: A log-prob is not finite
        ContractError: tau <= 0 or the batch is empty
    """
    if not (math.isfinite(tau) and tau > 0):
        raise ContractError(f"tau must be finite and > 0, got {tau}")
    try:
        logp_w, logp_l = _pairwise(logp_w, logp_l, "policy_loss_dpo")
        ref_logp_w, ref_logp_l = _pairwise(ref_logp_w, ref_logp_l, "policy_loss_dpo")
    except NumericError as e:
        raise NumericError(f"policy_loss_dpo: non-finite log-prob input ({e.message})", e.details)
    if ref_logp_w.shape != logp_w.shape:
        raise ShapeError("policy_loss_dpo: policy and reference shapes differ", logp_w.shape, ref_logp_w.shape)
    pd_win = logp_w - ref_logp_w
    pd_lose = logp_l - ref_logp_l
    return -log_sigmoid((pd_win - pd_lose) * tau).mean()


@dataclass
class LossBreakdown:
    """Per-batch telemetry; ``l_h`` is always ``l_s + alpha * l_p`` whatever drives the update"""

    l_s: float
    l_p: float
    l_h: float
    objective: float
    margin: float
    pd_win_mean: float
    pd_lose_mean: float
    mode: str = ObjectiveMode.HYBRID.value
    grad_norm: Optional[float] = None

    def to_log_entry(self, step: int) -> Dict[str, Any]:
        entry = {"step": step}
        entry.update(asdict(self))
        return entry


def hybrid_loss(
    batch: PreferenceBatch,
    model: DualHeadModel,
    reference: DualHeadModel,
    cfg: HybridConfig,
    mode: ObjectiveMode = ObjectiveMode.HYBRID,
) -> Tuple[Tensor, LossBreakdown]:
    """Rewards and response log-probs for chosen and rejected through one backbone pass.

    ``hybrid`` optimizes L_s + alpha * L_P, ``baseline`` optimizes L_s alone and
    ``dpo`` optimizes alpha * L_P alone. Terms that do not drive the update are
    still reported, computed without recording a graph. A hybrid objective
    with alpha == 0 never builds the policy graph, so it is the baseline
    objective bit for bit.
    """
    B = batch.n_pairs
    if B == 0:
        raise ContractError("hybrid_loss: empty batch")
    mode = ObjectiveMode(mode)
    if mode == ObjectiveMode.HYBRID and cfg.alpha == 0:
        mode = ObjectiveMode.BASELINE
    win, lose = slice(0, B), slice(B, 2 * B)

    with no_grad():
        ref_logp = reference.sequence_log_probs(batch.tokens)
    hidden = model.hidden_states(batch.tokens)

    if mode == ObjectiveMode.DPO:
        with no_grad():
            rewards = model.rewards(batch.tokens, hidden)
            l_s = reward_loss(rewards[win], rewards[lose])
    else:
        rewards = model.rewards(batch.tokens, hidden)
        l_s = reward_loss(rewards[win], rewards[lose])

    if mode == ObjectiveMode.BASELINE:
        with no_grad():
            logp = model.sequence_log_probs(batch.tokens, hidden)
            l_p = policy_loss_dpo(logp[win], logp[lose], ref_logp[win], ref_logp[lose], cfg.tau)
    else:
        logp = model.sequence_log_probs(batch.tokens, hidden)
        l_p = policy_loss_dpo(logp[win], logp[lose], ref_logp[win], ref_logp[lose], cfg.tau)

    if mode == ObjectiveMode.BASELINE:
        objective = l_s
    elif mode == ObjectiveMode.DPO:
        objective = l_p * cfg.alpha
    else:
        objective = l_s + l_p * cfg.alpha

    pd = logp.data - ref_logp.data
    r = rewards.data
    ls, lp = l_s.item(), l_p.item()
    breakdown = LossBreakdown(
        l_s=ls,
        l_p=lp,
        l_h=ls + cfg.alpha * lp,
        objective=objective.item(),
        margin=float(np.mean(r[:B] - r[B:])),
        pd_win_mean=float(np.mean(pd[:B])),
        pd_lose_mean=float(np.mean(pd[B:])),
        mode=mode.value,
    )
    return objective, breakdown
