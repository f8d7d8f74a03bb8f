"""
Unit tests for the byte tokenizer, the dual-head transformer and checkpoint files.
"""

import json
import math

import numpy as np
import pytest

from hafrm.config import ModelConfig
from hafrm.model import (
    Checkpoint,
    DualHeadModel,
    collate,
    decode,
    decode_bytes,
    encode_pair,
    forward_hidden,
    init_params,
    load_checkpoint,
    policy_logits,
    reward_of,
    save_checkpoint,
    sequence_log_prob,
    snapshot_reference,
    tokenize,
)
from hafrm.tensor_core import no_grad
from hafrm.tests.helpers import randomize_reward_head, zero_policy_head
from hafrm.utils.constants import BOS_ID, PAD_ID, SEP_ID, VOCAB_SIZE
from hafrm.utils.exceptions import CheckpointError, ContractError, SequenceLengthError

pytestmark = pytest.mark.unit


class TestTokenizer:
    """Byte-level ids and pair layout."""

    def test_empty_string(self):
        assert tokenize("") == []

    def test_ascii_bytes(self):
        assert tokenize("ab") == [97, 98]

    def test_random_bytes_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            raw = bytes(rng.integers(0, 256, size=int(rng.integers(0, 40))).tolist())
            assert decode_bytes(tokenize(raw)) == raw

    def test_text_round_trip(self):
        for text in ["héllo wörld", "日本語", "tab\tnew\nline", ""]:
            assert decode(tokenize(text)) == text

    def test_specials_are_dropped_on_decode(self):
        assert decode([BOS_ID, 104, 105, SEP_ID, PAD_ID]) == "hi"

    def test_short_pair_layout(self):
        pair = encode_pair("q", "a", ModelConfig(max_seq_len=128))
        assert pair.tokens == (BOS_ID, ord("q"), SEP_ID, ord("a"))
        assert pair.length == 4
        assert pair.response_span == (3, 4)
        assert pair.truncated == 0

    def test_long_prompt_keeps_its_tail(self):
        prompt = "".join(chr(ord("a") + i % 26) for i in range(200))
        response = "0123456789"
        pair = encode_pair(prompt, response, ModelConfig(max_seq_len=128))
        assert pair.length == 128
        assert pair.prompt_len == 116
        assert pair.truncated == 84
        assert bytes(pair.tokens[1:117]) == prompt.encode()[84:]
        assert bytes(pair.tokens[pair.response_span[0]:pair.response_span[1]]) == response.encode()

    def test_empty_response_rejected(self):
        with pytest.raises(ContractError):
            encode_pair("q", "", ModelConfig())

    def test_response_longer_than_context(self):
        with pytest.raises(SequenceLengthError) as exc:
            encode_pair("q", "x" * 127, ModelConfig(max_seq_len=128))
        assert exc.value.length == 129

    def test_collate_pads_right(self):
        cfg = ModelConfig()
        batch = collate([encode_pair("q", "a", cfg), encode_pair("qq", "abc", cfg)])
        assert batch.ids.shape == (2, 7)
        assert list(batch.ids[0, 4:]) == [PAD_ID] * 3
        assert list(batch.lengths) == [4, 7]


class TestDualHeadModel:
    """Backbone, heads and parameter bookkeeping."""

    def test_parameter_count_matches_config(self, tiny_config, tiny_model):
        assert tiny_model.parameter_count() == tiny_config.parameter_count()

    def test_init_is_seeded(self, tiny_config):
        a, b = init_params(tiny_config), init_params(tiny_config)
        assert all(np.array_equal(a[k], b[k]) for k in a)
        other = init_params(tiny_config.updated(seed=1))
        assert not np.array_equal(a["tok_emb"], other["tok_emb"])

    def test_rejects_mismatched_parameters(self, tiny_config):
        params = init_params(tiny_config)
        del params["ln_f.bias"]
        with pytest.raises(ContractError):
            DualHeadModel(tiny_config, params)

    def test_hidden_shape_and_determinism(self, tiny_config, tiny_model):
        pair = encode_pair("describe the river", "blue zest", tiny_config)
        h1 = forward_hidden(tiny_model, pair)
        h2 = forward_hidden(tiny_model, pair)
        assert h1.shape == (pair.length, tiny_config.d_model)
        assert np.array_equal(h1.data, h2.data)

    def test_causal_mask(self, tiny_config, tiny_model):
        """Changing token t moves hidden states at positions >= t only."""
        base = encode_pair("abcdefgh", "ijkl", tiny_config)
        t = 5
        tokens = list(base.tokens)
        tokens[t] = ord("Z")
        changed = base.__class__(tuple(tokens), base.prompt_len, base.response_span)
        with no_grad():
            h_base = forward_hidden(tiny_model, base).data
            h_changed = forward_hidden(tiny_model, changed).data
        assert np.array_equal(h_base[:t], h_changed[:t])
        assert not np.allclose(h_base[t], h_changed[t])

    def test_padding_does_not_change_reward(self, tiny_config, tiny_model):
        randomize_reward_head(tiny_model)
        pair = encode_pair("q", "some answer", tiny_config)
        with no_grad():
            alone = tiny_model.rewards(collate([pair])).item()
            padded = tiny_model.rewards(collate([pair], width=40)).data[0]
        assert alone == pytest.approx(padded, abs=1e-12)

    def test_zero_reward_head(self, tiny_config, tiny_model):
        for prompt, response in [("q", "a"), ("longer prompt", "longer response here")]:
            assert reward_of(tiny_model, encode_pair(prompt, response, tiny_config)) == 0.0

    def test_zero_policy_head_is_uniform(self, tiny_config, tiny_model):
        zero_policy_head(tiny_model)
        pair = encode_pair("q", "a", tiny_config)
        logits = policy_logits(tiny_model, pair)
        assert logits.shape == (pair.length, VOCAB_SIZE)
        assert sequence_log_prob(tiny_model, pair) == pytest.approx(-math.log(VOCAB_SIZE), abs=1e-12)

    def test_sequence_log_prob_matches_brute_force(self, tiny_config, tiny_model):
        pair = encode_pair("hi", "ok", tiny_config)
        with no_grad():
            logits = policy_logits(tiny_model, pair).data
        expected = 0.0
        for t in range(*pair.response_span):
            row = logits[t - 1]
            probs = np.exp(row - row.max())
            probs /= probs.sum()
            expected += math.log(probs[pair.tokens[t]])
        assert sequence_log_prob(tiny_model, pair) == pytest.approx(expected, abs=1e-10)

    def test_batch_wider_than_context(self, tiny_config, tiny_model):
        batch = collate([encode_pair("q", "a", tiny_config)], width=tiny_config.max_seq_len + 1)
        with pytest.raises(SequenceLengthError):
            tiny_model.hidden_states(batch)

    def test_reference_is_frozen_and_independent(self, tiny_model):
        reference = snapshot_reference(tiny_model)
        assert not any(p.requires_grad for _, p in reference.named_parameters())
        before = reference.params["tok_emb"].data.copy()
        tiny_model.params["tok_emb"].data += 1.0
        assert np.array_equal(reference.params["tok_emb"].data, before)


class TestCheckpoint:
    """Versioned save/load."""

    def test_round_trip_is_bit_exact(self, tmp_path, tiny_config, tiny_model):
        randomize_reward_head(tiny_model)
        path = save_checkpoint(tmp_path / "m.ckpt", Checkpoint(model=tiny_model, step=7, val_accuracy=0.75, meta={"mode": "hybrid"}))
        loaded = load_checkpoint(path)
        assert loaded.step == 7
        assert loaded.val_accuracy == 0.75
        assert loaded.meta == {"mode": "hybrid"}
        assert loaded.model.config == tiny_config
        for name, p in tiny_model.named_parameters():
            assert np.array_equal(p.data, loaded.model.params[name].data), name
        pair = encode_pair("q", "a", tiny_config)
        assert reward_of(loaded.model, pair) == reward_of(tiny_model, pair)

    def test_reference_round_trip_keeps_sequence_log_probs(self, tmp_path, tiny_config, tiny_model):
        reference = snapshot_reference(tiny_model)
        tiny_model.params["policy_head.weight"].data += 0.25
        path = save_checkpoint(tmp_path / "reference.ckpt", Checkpoint(model=reference))
        loaded = load_checkpoint(path).model

        batch = collate([
            encode_pair("name a river", "the nile", tiny_config),
            encode_pair("q", "a", tiny_config),
            encode_pair("x" * 40, "tail of a long prompt", tiny_config),
        ])
        with no_grad():
            expected = reference.sequence_log_probs(batch).data
            actual = loaded.sequence_log_probs(batch).data
            drifted = tiny_model.sequence_log_probs(batch).data
        assert np.array_equal(actual, expected)
        assert not np.array_equal(drifted, expected)

    def test_optimizer_state_round_trip(self, tmp_path, tiny_model):
        optim = {"step": 3, "m": {"tok_emb": np.ones((2, 2))}, "v": {"tok_emb": np.full((2, 2), 0.5)}}
        loaded = load_checkpoint(save_checkpoint(tmp_path / "o.ckpt", Checkpoint(model=tiny_model, optim=optim)))
        assert loaded.optim["step"] == 3
        assert np.array_equal(loaded.optim["v"]["tok_emb"], optim["v"]["tok_emb"])

    def test_wrong_format_tag(self, tmp_path, tiny_model):
        path = save_checkpoint(tmp_path / "m.ckpt", Checkpoint(model=tiny_model))
        doc = json.loads(path.read_text())
        doc["format"] = "hafrm-ckpt-v0"
        path.write_text(json.dumps(doc))
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path)
        assert "hafrm-ckpt-v0" in str(exc.value)

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_text("not json")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_loaded_model_is_frozen_by_default(self, tmp_path, tiny_model):
        loaded = load_checkpoint(save_checkpoint(tmp_path / "m.ckpt", Checkpoint(model=tiny_model)))
        assert not loaded.model.trainable
