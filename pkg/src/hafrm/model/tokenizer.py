"""Byte-level tokenizer and prompt/response pair encoding"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..config.schemas import ModelConfig
from ..utils.constants import BOS_ID, BYTE_VOCAB_SIZE, PAD_ID, SEP_ID, VOCAB_SIZE
from ..utils.exceptions import ContractError, SequenceLengthError

Text = Union[str, bytes]


@dataclass(frozen=True)
class Vocab:
    """Raw bytes 0..255 plus three special ids"""

    size: int = VOCAB_SIZE
    pad_id: int = PAD_ID
    bos_id: int = BOS_ID
    sep_id: int = SEP_ID

    @property
    def specials(self) -> Tuple[int, int, int]:
        return (self.pad_id, self.bos_id, self.sep_id)


BYTE_VOCAB = Vocab()


def _to_bytes(text: Text) -> bytes:
    if isinstance(text, bytes):
        return text
    return text.encode("utf-8", errors="surrogateescape")


def tokenize(text: Text, vocab: Vocab = BYTE_VOCAB) -> List[int]:
    """One id per byte of the UTF-8 encoding."""
    return list(_to_bytes(text))


def decode_bytes(ids: Sequence[int], vocab: Vocab = BYTE_VOCAB) -> bytes:
    """Inverse of ``tokenize``; special ids are dropped."""
    return bytes(int(i) for i in ids if 0 <= int(i) < BYTE_VOCAB_SIZE)


def decode(ids: Sequence[int], vocab: Vocab = BYTE_VOCAB) -> str:
    return decode_bytes(ids, vocab).decode("utf-8", errors="surrogateescape")


@dataclass(frozen=True)
class EncodedPair:
    """BOS + prompt + SEP + response, with the response located by ``response_span``."""

    tokens: Tuple[int, ...]
    prompt_len: int
    response_span: Tuple[int, int]
    truncated: int = 0

    @property
    def length(self) -> int:
        return len(self.tokens)


def encode_pair(prompt: Text, response: Text, cfg: ModelConfig, vocab: Vocab = BYTE_VOCAB) -> EncodedPair:
    """Encode a prompt/response pair, dropping the oldest prompt bytes when too long.

    Raises:
        ContractError: If the response is empty
        SequenceLengthError: If the response plus BOS and SEP exceeds max_seq_len
    """
    response_ids = tokenize(response, vocab)
    if not response_ids:
        raise ContractError("response is empty after tokenization")
    needed = len(response_ids) + 2
    if needed > cfg.max_seq_len:
        raise SequenceLengthError(
            f"response of {len(response_ids)} tokens plus BOS/SEP exceeds max_seq_len {cfg.max_seq_len}",
            needed,
            cfg.max_seq_len,
        )
    prompt_ids = tokenize(prompt, vocab)
    budget = cfg.max_seq_len - needed
    dropped = max(0, len(prompt_ids) - budget)
    prompt_ids = prompt_ids[dropped:]

    tokens = (vocab.bos_id, *prompt_ids, vocab.sep_id, *response_ids)
    start = len(prompt_ids) + 2
    return EncodedPair(tokens=tokens, prompt_len=len(prompt_ids), response_span=(start, len(tokens)), truncated=dropped)


@dataclass(frozen=True)
class TokenBatch:
    """Right-padded ids for several pairs."""

    ids: np.ndarray
    lengths: np.ndarray
    spans: Tuple[Tuple[int, int], ...]

    @property
    def size(self) -> int:
        return int(self.ids.shape[0])

    @property
    def width(self) -> int:
        return int(self.ids.shape[1])


def collate(pairs: Sequence[EncodedPair], vocab: Vocab = BYTE_VOCAB, width: int = 0) -> TokenBatch:
    """Stack pairs into an ``[N, T]`` id matrix padded with PAD; ``T`` is at least ``width``."""
    if not pairs:
        raise ContractError("cannot collate an empty list of pairs")
    T = max(width, max(p.length for p in pairs))
    ids = np.full((len(pairs), T), vocab.pad_id, dtype=np.int64)
    for row, pair in enumerate(pairs):
        ids[row, : pair.length] = pair.tokens
    lengths = np.array([p.length for p in pairs], dtype=np.int64)
    return TokenBatch(ids=ids, lengths=lengths, spans=tuple(p.response_span for p in pairs))
