"""Dual-head transformer: one shared backbone, a reward head and a policy head.

The backbone is token embedding + learned positions, ``n_layers`` pre-norm
blocks (causal multi-head attention, GELU MLP) and a final layer norm. The
reward head reads the hidden state of each sequence's last non-PAD token; the
policy head maps every hidden state to next-token logits. Both heads read the
same parameter tensors, so a backward pass through either one accumulates into
the shared backbone gradients.
"""

import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..config.schemas import ModelConfig
from ..tensor_core import Tensor, embedding, gelu, layer_norm, linear, log_softmax, masked_softmax, no_grad
from ..utils.exceptions import ContractError, SequenceLengthError
from .tokenizer import EncodedPair, TokenBatch, collate

logger = logging.getLogger(__name__)

INIT_STD = 0.02
LN_EPS = 1e-5


def _param_specs(cfg: ModelConfig) -> List[Tuple[str, Tuple[int, ...], str]]:
    """(name, shape, init) in the fixed order parameters are drawn."""
    d, V, S = cfg.d_model, cfg.vocab_size, cfg.max_seq_len
    specs = [
        ("tok_emb", (V, d), "normal"),
        ("pos_emb", (S, d), "normal"),
    ]
    for i in range(cfg.n_layers):
        p = f"blocks.{i}."
        specs += [
            (p + "ln1.gain", (d,), "ones"),
            (p + "ln1.bias", (d,), "zeros"),
            (p + "attn.w_qkv", (d, 3 * d), "normal"),
            (p + "attn.b_qkv", (3 * d,), "zeros"),
            (p + "attn.w_out", (d, d), "normal"),
            (p + "attn.b_out", (d,), "zeros"),
            (p + "ln2.gain", (d,), "ones"),
            (p + "ln2.bias", (d,), "zeros"),
            (p + "mlp.w_in", (d, 4 * d), "normal"),
            (p + "mlp.b_in", (4 * d,), "zeros"),
            (p + "mlp.w_out", (4 * d, d), "normal"),
            (p + "mlp.b_out", (d,), "zeros"),
        ]
    specs += [
        ("ln_f.gain", (d,), "ones"),
        ("ln_f.bias", (d,), "zeros"),
        ("reward_head.weight", (d, 1), "zeros"),
        ("reward_head.bias", (1,), "zeros"),
        ("policy_head.weight", (d, V), "normal"),
        ("policy_head.bias", (V,), "zeros"),
    ]
    return specs


def init_params(cfg: ModelConfig, rng: Optional[np.random.Generator] = None) -> Dict[str, np.ndarray]:
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    params: Dict[str, np.ndarray] = {}
    for name, shape, kind in _param_specs(cfg):
        if kind == "normal":
            params[name] = rng.normal(0.0, INIT_STD, size=shape)
        elif kind == "ones":
            params[name] = np.ones(shape)
        else:
            params[name] = np.zeros(shape)
    return params


class DualHeadModel:
    """Backbone phi with reward head F (d -> 1) and policy head K (d -> vocab)."""

    def __init__(self, config: ModelConfig, params: Optional[Dict[str, np.ndarray]] = None, trainable: bool = True):
        self.config = config
        arrays = params if params is not None else init_params(config)
        expected = {name: shape for name, shape, _ in _param_specs(config)}
        if set(arrays) != set(expected):
            missing = sorted(set(expected) - set(arrays))
            extra = sorted(set(arrays) - set(expected))
            raise ContractError(f"parameter names do not match config: missing {missing}, unexpected {extra}")
        self.params: Dict[str, Tensor] = {}
        for name, shape in expected.items():
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != shape:
                raise ContractError(f"parameter {name} has shape {arr.shape}, expected {shape}")
            self.params[name] = Tensor(arr, requires_grad=trainable)
        self.trainable = trainable
        self._causal = np.tril(np.ones((config.max_seq_len, config.max_seq_len), dtype=bool))

    # -- parameters --------------------------------------------------------

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self.params.items())

    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Copies of all parameter arrays, keyed by name."""
        return {name: p.data.copy() for name, p in self.params.items()}

    def frozen_copy(self) -> "DualHeadModel":
        return DualHeadModel(self.config, self.state_arrays(), trainable=False)

    # -- forward -----------------------------------------------------------

    def _attention(self, x: Tensor, prefix: str, T: int) -> Tensor:
        cfg = self.config
        N, d, H, dh = x.shape[0], cfg.d_model, cfg.n_heads, cfg.head_dim
        p = self.params
        qkv = linear(x, p[prefix + "w_qkv"], p[prefix + "b_qkv"])

        def heads(t: Tensor) -> Tensor:
            return t.reshape(N, T, H, dh).transpose(0, 2, 1, 3)

        q = heads(qkv[..., 0:d])
        k = heads(qkv[..., d:2 * d])
        v = heads(qkv[..., 2 * d:3 * d])
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(dh))
        weights = masked_softmax(scores, self._causal[:T, :T])
        out = (weights @ v).transpose(0, 2, 1, 3).reshape(N, T, d)
        return linear(out, p[prefix + "w_out"], p[prefix + "b_out"])

    def _block(self, x: Tensor, i: int, T: int) -> Tensor:
        p = self.params
        prefix = f"blocks.{i}."
        h = layer_norm(x, p[prefix + "ln1.gain"], p[prefix + "ln1.bias"], LN_EPS)
        x = x + self._attention(h, prefix + "attn.", T)
        h = layer_norm(x, p[prefix + "ln2.gain"], p[prefix + "ln2.bias"], LN_EPS)
        h = gelu(linear(h, p[prefix + "mlp.w_in"], p[prefix + "mlp.b_in"]))
        return x + linear(h, p[prefix + "mlp.w_out"], p[prefix + "mlp.b_out"])

    def hidden_states(self, batch: TokenBatch) -> Tensor:
        """Backbone output ``[N, T, d_model]`` under a causal mask."""
        N, T = batch.ids.shape
        if T > self.config.max_seq_len:
            raise SequenceLengthError(f"batch width {T} exceeds max_seq_len {self.config.max_seq_len}", T, self.config.max_seq_len)
        p = self.params
        x = embedding(p["tok_emb"], batch.ids) + p["pos_emb"][0:T]
        for i in range(self.config.n_layers):
            x = self._block(x, i, T)
        return layer_norm(x, p["ln_f.gain"], p["ln_f.bias"], LN_EPS)

    def rewards(self, batch: TokenBatch, hidden: Optional[Tensor] = None) -> Tensor:
        """One scalar per row, read at the last non-PAD position."""
        h = hidden if hidden is not None else self.hidden_states(batch)
        last = h[np.arange(batch.size), batch.lengths - 1]
        return linear(last, self.params["reward_head.weight"], self.params["reward_head.bias"]).reshape(batch.size)

    def policy_logits(self, batch: TokenBatch, hidden: Optional[Tensor] = None) -> Tensor:
        h = hidden if hidden is not None else self.hidden_states(batch)
        return linear(h, self.params["policy_head.weight"], self.params["policy_head.bias"])

    def sequence_log_probs(self, batch: TokenBatch, hidden: Optional[Tensor] = None) -> Tensor:
        """Sum over response tokens of log pi(token_t | tokens_<t), one value per row."""
        h = hidden if hidden is not None else self.hidden_states(batch)
        rows, positions, targets = [], [], []
        for row, (start, end) in enumerate(batch.spans):
            if end <= start:
                raise ContractError(f"row {row} has an empty response span")
            for t in range(start, end):
                rows.append(row)
                positions.append(t - 1)
                targets.append(int(batch.ids[row, t]))
        rows_arr = np.array(rows, dtype=np.int64)
        M = len(rows)
        selected = h[rows_arr, np.array(positions, dtype=np.int64)]
        logits = linear(selected, self.params["policy_head.weight"], self.params["policy_head.bias"])
        picked = log_softmax(logits)[np.arange(M), np.array(targets, dtype=np.int64)]
        owner = np.zeros((batch.size, M))
        owner[rows_arr, np.arange(M)] = 1.0
        return (Tensor(owner) @ picked.reshape(M, 1)).reshape(batch.size)


def _single(model: DualHeadModel, pair: EncodedPair) -> TokenBatch:
    if pair.length > model.config.max_seq_len:
        raise SequenceLengthError(
            f"pair of length {pair.length} exceeds max_seq_len {model.config.max_seq_len}",
            pair.length,
            model.config.max_seq_len,
        )
    return collate([pair])


def forward_hidden(model: DualHeadModel, pair: EncodedPair) -> Tensor:
    return model.hidden_states(_single(model, pair))[0]


def reward_of(model: DualHeadModel, pair: EncodedPair) -> float:
    with no_grad():
        return model.rewards(_single(model, pair)).item()


def policy_logits(model: DualHeadModel, pair: EncodedPair) -> Tensor:
    return model.policy_logits(_single(model, pair))[0]


def sequence_log_prob(model: DualHeadModel, pair: EncodedPair) -> float:
    with no_grad():
        return model.sequence_log_probs(_single(model, pair)).item()


def snapshot_reference(model: DualHeadModel) -> DualHeadModel:
    """Frozen deep copy used as pi_ref; its parameters never require grad."""
    reference = model.frozen_copy()
    logger.debug(f"reference snapshot taken ({reference.parameter_count()} parameters)")
    return reference
