"""Pairwise comparison manifests for an external judge and the verdicts that come back"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from ..utils.exceptions import ContractError, JudgeError
from .best_of_n import BestOfNResult

logger = logging.getLogger(__name__)

VERDICTS = ("A", "B", "tie")


def build_comparison_manifest(
    results_a: Sequence[BestOfNResult],
    results_b: Sequence[BestOfNResult],
    path: Union[str, Path],
) -> Path:
    """One line per prompt: ``{prompt_id, prompt, response_a, response_b}`` from the two selections."""
    by_id = {r.prompt_id: r for r in results_b}
    missing = [r.prompt_id for r in results_a if r.prompt_id not in by_id]
    if missing or len(results_a) != len(results_b):
        raise ContractError(f"result sets cover different prompts (e.g. {missing[:3]})")
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for a in results_a:
            b = by_id[a.prompt_id]
            row = {
                "prompt_id": a.prompt_id,
                "prompt": a.prompt,
                "response_a": a.selected_response,
                "response_b": b.selected_response,
            }
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    logger.info(f"wrote comparison manifest with {len(results_a)} row(s) to {path}")
    return path


@dataclass
class WinRateReport:
    n: int
    wins: int
    losses: int
    ties: int
    win_rate: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)


def ingest_verdicts(path: Union[str, Path], manifest: Optional[Union[str, Path]] = None) -> WinRateReport:
    """Count ``{prompt_id, winner: "A" | "B" | "tie"}`` verdicts; A is the model under test.

    ``win_rate`` is wins over decided comparisons (None if all are ties).
    When ``manifest`` is given every manifest prompt must have a verdict.

    Raises:
        JudgeError: Malformed verdict line, unknown winner or missing prompt
    """
    path = Path(path)
    verdicts = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                prompt_id, winner = str(row["prompt_id"]), row["winner"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise JudgeError(f"{path}:{line_number}: bad verdict row ({e})")
            if winner not in VERDICTS:
                raise JudgeError(f"{path}:{line_number}: winner must be one of {VERDICTS}, got {winner!r}", prompt_id)
            verdicts[prompt_id] = winner

    if manifest is not None:
        with open(manifest, "r", encoding="utf-8") as f:
            expected = [str(json.loads(line)["prompt_id"]) for line in f if line.strip()]
        missing = [p for p in expected if p not in verdicts]
        if missing:
            raise JudgeError(f"no verdict for prompt(s) {missing[:5]}", missing[0])

    wins = sum(1 for w in verdicts.values() if w == "A")
    losses = sum(1 for w in verdicts.values() if w == "B")
    ties = len(verdicts) - wins - losses
    decided = wins + losses
    return WinRateReport(n=len(verdicts), wins=wins, losses=losses, ties=ties, win_rate=wins / decided if decided else None)
