"""Turning preference records into model-ready token batches"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from ..config.schemas import ModelConfig
from ..model.tokenizer import TokenBatch, collate, encode_pair
from ..utils.exceptions import ContractError
from .records import PreferenceRecord


@dataclass(frozen=True)
class PreferenceBatch:
    """Chosen rows ``0..B-1`` followed by rejected rows ``B..2B-1`` in one padded batch."""

    ids: Tuple[str, ...]
    tokens: TokenBatch

    @property
    def n_pairs(self) -> int:
        return len(self.ids)


def encode_records(records: Sequence[PreferenceRecord], cfg: ModelConfig) -> PreferenceBatch:
    if not records:
        raise ContractError("cannot encode an empty batch of records")
    chosen = [encode_pair(r.prompt, r.chosen, cfg) for r in records]
    rejected = [encode_pair(r.prompt, r.rejected, cfg) for r in records]
    return PreferenceBatch(ids=tuple(r.id for r in records), tokens=collate(chosen + rejected))


def iter_batches(records: Sequence[PreferenceRecord], batch_size: int) -> List[List[PreferenceRecord]]:
    """Consecutive chunks of ``batch_size``; the last one may be short."""
    return [list(records[i:i + batch_size]) for i in range(0, len(records), batch_size)]
