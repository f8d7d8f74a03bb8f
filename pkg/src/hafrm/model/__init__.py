from .tokenizer import BYTE_VOCAB, EncodedPair, TokenBatch, Vocab, collate, decode, decode_bytes, encode_pair, tokenize
from .transformer import (
    DualHeadModel,
    forward_hidden,
    init_params,
    policy_logits,
    reward_of,
    sequence_log_prob,
    snapshot_reference,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "BYTE_VOCAB",
    "EncodedPair",
    "TokenBatch",
    "Vocab",
    "collate",
    "decode",
    "decode_bytes",
    "encode_pair",
    "tokenize",
    "DualHeadModel",
    "forward_hidden",
    "init_params",
    "policy_logits",
    "reward_of",
    "sequence_log_prob",
    "snapshot_reference",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
]
