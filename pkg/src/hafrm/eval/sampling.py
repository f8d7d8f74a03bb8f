"""Seeded ancestral sampling from the policy head, used to build best-of-N pools"""

from typing import List, Sequence, Union

import numpy as np

from ..model.tokenizer import TokenBatch, decode, tokenize
from ..model.transformer import DualHeadModel
from ..tensor_core import no_grad
from ..utils.constants import BOS_ID, SEP_ID
from ..utils.exceptions import ContractError

# printable ASCII plus newline
SAMPLE_TOKEN_IDS = np.array([10] + list(range(32, 127)), dtype=np.int64)
DEFAULT_MAX_NEW_TOKENS = 32


def sample_candidates(
    model: DualHeadModel,
    prompt: str,
    n: int,
    temperature: float = 1.0,
    seed: Union[int, Sequence[int]] = 0,
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS,
) -> List[str]:
    """``n`` responses drawn token by token; duplicates are allowed.

    All candidates grow in one batch. Each step draws one uniform number per
    candidate from ``default_rng(seed)`` and inverts the CDF of the
    temperature-scaled distribution over ``SAMPLE_TOKEN_IDS``.
    """
    if n < 2:
        raise ContractError(f"sample_candidates needs n >= 2, got {n}")
    if not temperature > 0:
        raise ContractError(f"temperature must be > 0, got {temperature}")
    cfg = model.config
    max_new = max(1, min(max_new_tokens, cfg.max_seq_len - 2))
    prompt_ids = tokenize(prompt)
    keep = cfg.max_seq_len - 2 - max_new
    prompt_ids = prompt_ids[len(prompt_ids) - keep:] if len(prompt_ids) > keep else prompt_ids

    prefix = [BOS_ID, *prompt_ids, SEP_ID]
    ids = np.tile(np.array(prefix, dtype=np.int64), (n, 1))
    rng = np.random.default_rng(seed)
    w = model.params["policy_head.weight"].data[:, SAMPLE_TOKEN_IDS]
    b = model.params["policy_head.bias"].data[SAMPLE_TOKEN_IDS]

    generated = np.zeros((n, 0), dtype=np.int64)
    with no_grad():
        for _ in range(max_new):
            T = ids.shape[1]
            batch = TokenBatch(ids=ids, lengths=np.full(n, T, dtype=np.int64), spans=tuple((T - 1, T) for _ in range(n)))
            last = model.hidden_states(batch).data[:, T - 1, :]
            logits = (last @ w + b) / temperature
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            cdf = np.cumsum(probs, axis=1)
            u = rng.random(n) * cdf[:, -1]
            choice = np.minimum((cdf <= u[:, None]).sum(axis=1), len(SAMPLE_TOKEN_IDS) - 1)
            tokens = SAMPLE_TOKEN_IDS[choice]
            ids = np.concatenate([ids, tokens[:, None]], axis=1)
            generated = np.concatenate([generated, tokens[:, None]], axis=1)
    return [decode(row) for row in generated]
