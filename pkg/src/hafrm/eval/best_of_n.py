"""Best-of-N selection and top-k recall against a judge"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Union

import numpy as np
from opentelemetry import trace

from otel.metrics import record_eval_run

from ..model.transformer import DualHeadModel
from ..utils.constants import RecallMode
from ..utils.exceptions import ConfigError, ContractError
from .judges import Judge
from .scorers import Scorer, as_scorer

logger = logging.getLogger(__name__)
tracer = trace.get_tracer("hafrm-eval")


@dataclass
class BestOfNResult:
    prompt_id: str
    prompt: str
    candidates: List[str]
    rewards: List[float]
    selected: int
    tie: bool = False
    judge_ranking: Optional[List[int]] = None

    @property
    def selected_response(self) -> str:
        return self.candidates[self.selected]

    def to_dict(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "prompt": self.prompt,
            "candidates": self.candidates,
            "rewards": self.rewards,
            "selected": self.selected,
            "tie": self.tie,
            "judge_ranking": self.judge_ranking,
        }


def select_best(rewards: Sequence[float]) -> tuple:
    """(argmax index with ties to the lowest index, whether the maximum is shared)."""
    arr = np.asarray(rewards, dtype=np.float64)
    best = int(np.argmax(arr))
    return best, bool(np.count_nonzero(arr == arr[best]) > 1)


def best_of_n(
    model: Union[DualHeadModel, Scorer],
    prompt: str,
    candidates: Sequence[str],
    prompt_id: str = "",
    judge: Optional[Judge] = None,
) -> BestOfNResult:
    """Score every candidate against ``prompt`` and pick the highest reward.

    Raises:
        ContractError: Fewer than two candidates
    """
    if len(candidates) < 2:
        raise ContractError(f"best_of_n needs at least 2 candidates, got {len(candidates)}")
    scorer = as_scorer(model)
    rewards = scorer.score([(prompt, c) for c in candidates])
    selected, tie = select_best(rewards)
    ranking = judge.rank(prompt, candidates, prompt_id) if judge is not None else None
    return BestOfNResult(
        prompt_id=prompt_id,
        prompt=prompt,
        candidates=list(candidates),
        rewards=[float(r) for r in rewards],
        selected=selected,
        tie=tie,
        judge_ranking=ranking,
    )


def best_of_n_batch(
    model: Union[DualHeadModel, Scorer],
    pools: Sequence[tuple],
    judge: Optional[Judge] = None,
) -> List[BestOfNResult]:
    """``pools`` holds (prompt_id, prompt, candidates) triples."""
    scorer = as_scorer(model)
    start = time.perf_counter()
    with tracer.start_as_current_span("best_of_n") as span:
        span.set_attribute("prompts", len(pools))
        results = [best_of_n(scorer, prompt, cands, prompt_id, judge) for prompt_id, prompt, cands in pools]
    ties = sum(1 for r in results if r.tie)
    if ties:
        logger.info(f"best-of-N: {ties} of {len(results)} selection(s) broke a reward tie")
    record_eval_run("best_of_n", len(results), (time.perf_counter() - start) * 1000)
    return results


@dataclass
class RecallReport:
    k: int
    mode: str
    n_prompts: int
    hits: float
    recall: float
    dataset: str = ""


def top_k_recall(
    results: Sequence[BestOfNResult],
    k: int,
    mode: Union[str, RecallMode] = RecallMode.MEMBERSHIP,
    dataset: str = "",
) -> RecallReport:
    """Share of prompts whose selection agrees with the judge's top ``k``.

    ``membership``: the selected candidate is among the judge's top k.
    ``overlap``: |model top-k by reward ∩ judge top-k| / k, averaged over prompts.

    Raises:
        ContractError: A result has no judge ranking, or k is outside [1, N)
    """
    mode = RecallMode(mode)
    if not results:
        raise ContractError("top_k_recall needs at least one result")
    hits = 0.0
    for r in results:
        if r.judge_ranking is None:
            raise ContractError(f"prompt {r.prompt_id!r} has no judge ranking")
        n = len(r.candidates)
        if not 1 <= k < n:
            raise ContractError(f"k must satisfy 1 <= k < N ({n}) for prompt {r.prompt_id!r}, got {k}")
        judge_top = set(r.judge_ranking[:k])
        if mode == RecallMode.MEMBERSHIP:
            hits += 1.0 if r.selected in judge_top else 0.0
        else:
            model_top = sorted(range(n), key=lambda i: (-r.rewards[i], i))[:k]
            hits += len(judge_top.intersection(model_top)) / k
    return RecallReport(k=k, mode=mode.value, n_prompts=len(results), hits=hits, recall=hits / len(results), dataset=dataset)


def average_recall(reports: Mapping[str, RecallReport], tags: Sequence[str]) -> float:
    """Mean recall over the datasets named in ``tags``."""
    if not tags:
        raise ConfigError("average_recall needs at least one dataset tag")
    missing = [t for t in tags if t not in reports]
    if missing:
        raise ConfigError(f"no recall report for dataset(s) {missing}", {"missing": missing})
    return float(np.mean([reports[t].recall for t in tags]))
