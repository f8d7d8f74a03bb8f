"""
Unit tests for pairwise accuracy, the OOD matrix, judges, best-of-N, sampling and win rates.
"""

import json

import numpy as np
import pytest

from hafrm.data import MARKER_WORD, rule_score, synth_candidates
from hafrm.eval import (
    SAMPLE_TOKEN_IDS,
    FileJudge,
    FunctionScorer,
    ImplicitRewardScorer,
    ModelScorer,
    OracleJudge,
    RuleScorer,
    average_recall,
    best_of_n,
    best_of_n_batch,
    build_comparison_manifest,
    implicit_dpo_reward,
    ingest_verdicts,
    ood_delta,
    ood_matrix,
    pairwise_accuracy,
    parse_judge,
    sample_candidates,
    select_best,
    top_k_recall,
    validate_ranking,
)
from hafrm.model import TokenBatch, decode, snapshot_reference, tokenize
from hafrm.tensor_core import no_grad
from hafrm.tests.helpers import randomize_reward_head
from hafrm.utils.constants import BOS_ID, SEP_ID
from hafrm.utils.exceptions import ConfigError, ContractError, JudgeError

pytestmark = pytest.mark.unit


def length_scorer():
    return FunctionScorer(lambda prompt, response: float(len(response)))


class TestPairwiseAccuracy:
    """Strict-inequality accuracy and margin."""

    def test_oracle_scorer_is_perfect(self, marker_records):
        report = pairwise_accuracy(RuleScorer("marker-count"), marker_records)
        assert report.accuracy == 1.0
        assert report.n_correct == report.n_pairs == 60
        assert report.dataset == "marker-count"
        assert report.margin > 0

    def test_ties_count_as_wrong(self, marker_records):
        report = pairwise_accuracy(FunctionScorer(lambda p, r: 0.0), marker_records, dataset="flat")
        assert report.accuracy == 0.0
        assert report.margin == 0.0
        assert report.dataset == "flat"

    def test_zero_reward_model_scores_zero(self, tiny_model, marker_records):
        assert pairwise_accuracy(tiny_model, marker_records[:10]).accuracy == 0.0

    def test_hand_counted(self, make_record):
        records = [
            make_record(0, chosen="long answer", rejected="short"),
            make_record(1, chosen="tiny", rejected="much longer"),
            make_record(2, chosen="same", rejected="size"),
        ]
        report = pairwise_accuracy(length_scorer(), records)
        assert (report.n_correct, report.n_pairs) == (1, 3)
        assert report.accuracy == pytest.approx(1 / 3)
        assert report.margin == pytest.approx((6 - 7 + 0) / 3)

    def test_shift_invariance(self, tiny_model, marker_records):
        randomize_reward_head(tiny_model)
        base = pairwise_accuracy(tiny_model, marker_records[:20])
        tiny_model.params["reward_head.bias"].data[...] += 12.5
        shifted = pairwise_accuracy(tiny_model, marker_records[:20])
        assert shifted.accuracy == base.accuracy
        assert shifted.margin == pytest.approx(base.margin, abs=1e-9)

    def test_empty(self):
        with pytest.raises(ContractError):
            pairwise_accuracy(length_scorer(), [])


class TestOODMatrix:
    """Cross-dataset grid and group-restricted averages."""

    @pytest.fixture
    def grid(self, marker_records, safety_records):
        models = {"marker-count": RuleScorer("marker-count"), "keyword-safety": RuleScorer("keyword-safety")}
        datasets = {"marker-count": marker_records, "keyword-safety": safety_records}
        return models, datasets

    def test_cells_and_averages(self, grid):
        models, datasets = grid
        matrix = ood_matrix(models, datasets, {"marker-count": "g", "keyword-safety": "g"})
        assert matrix.cell("marker-count", "marker-count") == 1.0
        assert matrix.cell("keyword-safety", "keyword-safety") == 1.0
        off = matrix.cell("marker-count", "keyword-safety")
        assert matrix.r_acc["marker-count"] == off
        assert matrix.row_average["marker-count"] == pytest.approx((1.0 + off) / 2)
        assert matrix.r_acc_columns("marker-count") == ["keyword-safety"]

    def test_separate_groups_fall_back_to_diagonal(self, grid):
        models, datasets = grid
        matrix = ood_matrix(models, datasets, {"marker-count": "helpful", "keyword-safety": "harmless"})
        assert matrix.r_acc["marker-count"] == 1.0
        assert matrix.in_distribution_only["marker-count"]

    def test_missing_group(self, grid):
        models, datasets = grid
        with pytest.raises(ConfigError):
            ood_matrix(models, datasets, {"marker-count": "g"})

    def test_delta(self, grid):
        models, datasets = grid
        groups = {"marker-count": "g", "keyword-safety": "g"}
        a = ood_matrix(models, datasets, groups)
        flat = {tag: FunctionScorer(lambda p, r: 0.0) for tag in models}
        b = ood_matrix(flat, datasets, groups)
        delta = ood_delta(a, b)
        assert delta.cells == a.cells
        assert delta.r_acc == a.r_acc

    def test_delta_needs_same_grid(self, grid, marker_records):
        models, datasets = grid
        groups = {"marker-count": "g", "keyword-safety": "g"}
        a = ood_matrix(models, datasets, groups)
        b = ood_matrix(models, {"marker-count": marker_records}, groups)
        with pytest.raises(ContractError):
            ood_delta(a, b)


class TestJudges:
    """Rankings as permutations of candidate indices."""

    def test_oracle_orders_by_rule(self):
        candidates = ["blue", f"{MARKER_WORD} blue {MARKER_WORD}", f"{MARKER_WORD} cold", "warm"]
        assert OracleJudge("marker-count").rank("p", candidates) == [1, 2, 0, 3]

    def test_validate_ranking(self):
        assert validate_ranking([2, 0, 1], 3) == [2, 0, 1]
        with pytest.raises(JudgeError):
            validate_ranking([0, 0, 1], 3)
        with pytest.raises(JudgeError):
            validate_ranking([0, 1], 3)

    def test_file_judge(self, write_lines):
        judge = FileJudge(write_lines("j.jsonl", [{"prompt_id": "a", "ranking": [1, 0]}]))
        assert judge.rank("p", ["x", "y"], "a") == [1, 0]
        with pytest.raises(JudgeError):
            judge.rank("p", ["x", "y"], "b")
        with pytest.raises(JudgeError):
            judge.rank("p", ["x", "y", "z"], "a")

    def test_parse_judge(self, tmp_path, write_lines):
        assert isinstance(parse_judge("oracle:length-band"), OracleJudge)
        assert parse_judge("oracle", default_rule="keyword-safety").rule.value == "keyword-safety"
        assert isinstance(parse_judge(f"file:{write_lines('j.jsonl', [])}"), FileJudge)
        with pytest.raises(JudgeError):
            parse_judge("oracle")
        with pytest.raises(JudgeError):
            parse_judge("human")


class TestBestOfN:
    """Selection by reward and agreement with the judge."""

    def test_select_best_breaks_ties_low(self):
        assert select_best([0.5, 2.0, 2.0]) == (1, True)
        assert select_best([3.0, 1.0]) == (0, False)

    def test_needs_two_candidates(self):
        with pytest.raises(ContractError):
            best_of_n(length_scorer(), "p", ["only"])

    def test_oracle_scorer_recall_is_one(self):
        rng = np.random.default_rng(0)
        pools = [(f"p{i}", "describe the river", synth_candidates("marker-count", 4, rng)) for i in range(200)]
        results = best_of_n_batch(RuleScorer("marker-count"), pools, OracleJudge("marker-count"))
        assert top_k_recall(results, 1).recall == 1.0
        assert top_k_recall(results, 2).recall == 1.0

    def test_recall_modes_hand_computed(self):
        # rewards prefer 0 then 1; judge prefers 1 then 2
        judge = FileJudgeStub({"a": [1, 2, 0, 3]})
        scorer = FunctionScorer(lambda p, r: {"w": 4.0, "x": 3.0, "y": 2.0, "z": 1.0}[r])
        results = [best_of_n(scorer, "p", ["w", "x", "y", "z"], "a", judge)]
        assert top_k_recall(results, 1).recall == 0.0
        assert top_k_recall(results, 2, mode="membership").recall == 0.0
        assert top_k_recall(results, 2, mode="overlap").recall == 0.5
        assert top_k_recall(results, 3, mode="membership").recall == 1.0

    def test_recall_needs_rankings(self):
        results = [best_of_n(length_scorer(), "p", ["a", "bb"], "x")]
        with pytest.raises(ContractError):
            top_k_recall(results, 1)

    def test_k_bounds(self):
        results = [best_of_n(length_scorer(), "p", ["a", "bb"], "x", OracleJudge("length-band"))]
        with pytest.raises(ContractError):
            top_k_recall(results, 2)

    def test_average_recall(self):
        rng = np.random.default_rng(1)
        pools = [(f"p{i}", "q", synth_candidates("keyword-safety", 4, rng)) for i in range(20)]
        results = best_of_n_batch(RuleScorer("keyword-safety"), pools, OracleJudge("keyword-safety"))
        reports = {"safety": top_k_recall(results, 1), "other": top_k_recall(results, 1)}
        assert average_recall(reports, ["safety", "other"]) == 1.0
        with pytest.raises(ConfigError):
            average_recall(reports, ["missing"])


class FileJudgeStub:
    """Fixed rankings keyed by prompt id."""

    def __init__(self, rankings):
        self.rankings = rankings

    def rank(self, prompt, candidates, prompt_id=""):
        return validate_ranking(self.rankings[prompt_id], len(candidates), prompt_id)


class TestImplicitReward:
    """log pi - log pi_ref."""

    def test_zero_against_own_snapshot(self, tiny_model):
        reference = snapshot_reference(tiny_model)
        assert implicit_dpo_reward(tiny_model, reference, "q", "an answer") == 0.0
        scores = ImplicitRewardScorer(tiny_model, reference).score([("q", "a"), ("q", "bb")])
        assert np.array_equal(scores, np.zeros(2))

    def test_moves_with_the_policy(self, tiny_model):
        reference = snapshot_reference(tiny_model)
        tiny_model.params["policy_head.bias"].data[ord("a")] += 1.0
        assert implicit_dpo_reward(tiny_model, reference, "q", "aa") > 0.0

    def test_model_scorer_batches_match_single_items(self, tiny_model, marker_records):
        randomize_reward_head(tiny_model)
        items = [(r.prompt, r.chosen) for r in marker_records[:7]]
        batched = ModelScorer(tiny_model, batch_size=3).score(items)
        single = np.array([ModelScorer(tiny_model).score([item])[0] for item in items])
        assert np.allclose(batched, single, atol=1e-12)


class TestSampling:
    """Seeded candidate generation from the policy head."""

    def test_deterministic_for_a_seed(self, tiny_model):
        a = sample_candidates(tiny_model, "describe the river", 4, seed=3, max_new_tokens=8)
        b = sample_candidates(tiny_model, "describe the river", 4, seed=3, max_new_tokens=8)
        assert a == b
        assert len(a) == 4
        assert all(len(c) == 8 for c in a)

    def test_seed_changes_samples(self, tiny_model):
        a = sample_candidates(tiny_model, "q", 4, seed=[0, 1], max_new_tokens=8)
        b = sample_candidates(tiny_model, "q", 4, seed=[0, 2], max_new_tokens=8)
        assert a != b

    def test_long_prompt_fits_context(self, tiny_config, tiny_model):
        out = sample_candidates(tiny_model, "x" * 500, 2, max_new_tokens=200)
        assert all(len(c) == tiny_config.max_seq_len - 2 for c in out)

    def test_near_zero_temperature_is_greedy(self, tiny_model):
        rng = np.random.default_rng(5)
        head = tiny_model.params["policy_head.weight"]
        head.data[...] = rng.normal(0.0, 1.0, size=head.shape)

        ids = [BOS_ID, *tokenize("greedy"), SEP_ID]
        with no_grad():
            for _ in range(6):
                batch = TokenBatch(ids=np.array([ids]), lengths=np.array([len(ids)]), spans=((len(ids) - 1, len(ids)),))
                logits = tiny_model.policy_logits(batch).data[0, -1, SAMPLE_TOKEN_IDS]
                ids.append(int(SAMPLE_TOKEN_IDS[int(np.argmax(logits))]))
        greedy = decode(ids[-6:])

        for seed in (0, 1, [2, 3], 17):
            out = sample_candidates(tiny_model, "greedy", 4, temperature=1e-8, seed=seed, max_new_tokens=6)
            assert len(set(out)) == 1
            assert out[0] == greedy

    def test_contract(self, tiny_model):
        with pytest.raises(ContractError):
            sample_candidates(tiny_model, "q", 1)
        with pytest.raises(ContractError):
            sample_candidates(tiny_model, "q", 2, temperature=0.0)


class TestWinRate:
    """Manifests out, verdicts in."""

    def _results(self, scorer, pools):
        return best_of_n_batch(scorer, pools)

    def test_manifest_and_verdicts(self, tmp_path, write_lines):
        pools = [("a", "p1", ["x", "yy"]), ("b", "p2", ["zzz", "w"])]
        longest = self._results(length_scorer(), pools)
        shortest = self._results(FunctionScorer(lambda p, r: -float(len(r))), pools)
        manifest = build_comparison_manifest(longest, shortest, tmp_path / "manifest.jsonl")
        rows = [json.loads(line) for line in manifest.read_text().splitlines()]
        assert rows[0] == {"prompt_id": "a", "prompt": "p1", "response_a": "yy", "response_b": "x"}

        verdicts = write_lines("v.jsonl", [{"prompt_id": "a", "winner": "A"}, {"prompt_id": "b", "winner": "tie"}])
        report = ingest_verdicts(verdicts, manifest)
        assert (report.n, report.wins, report.losses, report.ties) == (2, 1, 0, 1)
        assert report.win_rate == 1.0

    def test_all_ties(self, write_lines):
        report = ingest_verdicts(write_lines("v.jsonl", [{"prompt_id": "a", "winner": "tie"}]))
        assert report.win_rate is None

    def test_missing_verdict(self, write_lines):
        manifest = write_lines("m.jsonl", [{"prompt_id": "a"}, {"prompt_id": "b"}])
        verdicts = write_lines("v.jsonl", [{"prompt_id": "a", "winner": "B"}])
        with pytest.raises(JudgeError):
            ingest_verdicts(verdicts, manifest)

    def test_unknown_winner(self, write_lines):
        with pytest.raises(JudgeError):
            ingest_verdicts(write_lines("v.jsonl", [{"prompt_id": "a", "winner": "C"}]))

    def test_manifest_needs_matching_prompts(self, tmp_path):
        a = self._results(length_scorer(), [("a", "p", ["x", "yy"])])
        b = self._results(length_scorer(), [("b", "p", ["x", "yy"])])
        with pytest.raises(ContractError):
            build_comparison_manifest(a, b, tmp_path / "m.jsonl")


def test_length_band_penalizes_distance_from_band():
    assert rule_score("length-band", " ".join(["blue"] * 20)) == -8.0
