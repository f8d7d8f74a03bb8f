from .scorers import (
    FunctionScorer,
    ImplicitRewardScorer,
    ModelScorer,
    RuleScorer,
    Scorer,
    as_scorer,
    implicit_dpo_reward,
)
from .accuracy import AccuracyReport, OODDelta, OODMatrix, ood_delta, ood_matrix, pairwise_accuracy
from .judges import FileJudge, Judge, OracleJudge, parse_judge, validate_ranking
from .best_of_n import (
    BestOfNResult,
    RecallReport,
    average_recall,
    best_of_n,
    best_of_n_batch,
    select_best,
    top_k_recall,
)
from .sampling import SAMPLE_TOKEN_IDS, sample_candidates
from .winrate import WinRateReport, build_comparison_manifest, ingest_verdicts

__all__ = [
    "FunctionScorer",
    "ImplicitRewardScorer",
    "ModelScorer",
    "RuleScorer",
    "Scorer",
    "as_scorer",
    "implicit_dpo_reward",
    "AccuracyReport",
    "OODDelta",
    "OODMatrix",
    "ood_delta",
    "ood_matrix",
    "pairwise_accuracy",
    "FileJudge",
    "Judge",
    "OracleJudge",
    "parse_judge",
    "validate_ranking",
    "BestOfNResult",
    "RecallReport",
    "average_recall",
    "best_of_n",
    "best_of_n_batch",
    "select_best",
    "top_k_recall",
    "SAMPLE_TOKEN_IDS",
    "sample_candidates",
    "WinRateReport",
    "build_comparison_manifest",
    "ingest_verdicts",
]
