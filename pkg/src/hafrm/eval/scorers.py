"""Things that assign a scalar reward to (prompt, response) pairs"""

from typing import Callable, List, Protocol, Sequence, Tuple, Union

import numpy as np

from ..data.synth import parse_rule, rule_score
from ..model.tokenizer import collate, encode_pair
from ..model.transformer import DualHeadModel
from ..tensor_core import no_grad
from ..utils.constants import SynthRule

Item = Tuple[str, str]

DEFAULT_SCORE_BATCH = 64


class Scorer(Protocol):
    def score(self, items: Sequence[Item]) -> np.ndarray:
        """One reward per (prompt, response) item."""
        ...


class ModelScorer:
    """Reward head of a dual-head model."""

    def __init__(self, model: DualHeadModel, batch_size: int = DEFAULT_SCORE_BATCH):
        self.model = model
        self.batch_size = batch_size

    def score(self, items: Sequence[Item]) -> np.ndarray:
        out: List[np.ndarray] = []
        cfg = self.model.config
        with no_grad():
            for i in range(0, len(items), self.batch_size):
                chunk = items[i:i + self.batch_size]
                batch = collate([encode_pair(p, r, cfg) for p, r in chunk])
                out.append(self.model.rewards(batch).data.copy())
        return np.concatenate(out) if out else np.zeros(0)


class ImplicitRewardScorer:
    """log pi(x, y) - log pi_ref(x, y) of a policy against its reference."""

    def __init__(self, policy: DualHeadModel, reference: DualHeadModel, batch_size: int = DEFAULT_SCORE_BATCH):
        self.policy = policy
        self.reference = reference
        self.batch_size = batch_size

    def score(self, items: Sequence[Item]) -> np.ndarray:
        out: List[np.ndarray] = []
        cfg = self.policy.config
        with no_grad():
            for i in range(0, len(items), self.batch_size):
                chunk = items[i:i + self.batch_size]
                batch = collate([encode_pair(p, r, cfg) for p, r in chunk])
                diff = self.policy.sequence_log_probs(batch).data - self.reference.sequence_log_probs(batch).data
                out.append(diff)
        return np.concatenate(out) if out else np.zeros(0)


class RuleScorer:
    """Ground-truth synthetic rule used as a reward model."""

    def __init__(self, rule: Union[str, SynthRule]):
        self.rule = parse_rule(rule)

    def score(self, items: Sequence[Item]) -> np.ndarray:
        return np.array([rule_score(self.rule, response) for _, response in items], dtype=np.float64)


class FunctionScorer:
    def __init__(self, fn: Callable[[str, str], float]):
        self.fn = fn

    def score(self, items: Sequence[Item]) -> np.ndarray:
        return np.array([self.fn(p, r) for p, r in items], dtype=np.float64)


def as_scorer(model_or_scorer: Union[DualHeadModel, Scorer]) -> Scorer:
    if isinstance(model_or_scorer, DualHeadModel):
        return ModelScorer(model_or_scorer)
    return model_or_scorer


def implicit_dpo_reward(policy: DualHeadModel, reference: DualHeadModel, prompt: str, response: str) -> float:
    """log pi(x, y) - log pi_ref(x, y); zero when the policy equals its reference."""
    return float(ImplicitRewardScorer(policy, reference).score([(prompt, response)])[0])
