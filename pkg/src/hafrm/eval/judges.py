"""Judges rank best-of-N candidates; the ranking lists candidate indices best first"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Sequence, Union

from ..data.synth import parse_rule, rule_score
from ..utils.constants import SynthRule
from ..utils.exceptions import JudgeError

logger = logging.getLogger(__name__)


class Judge(Protocol):
    def rank(self, prompt: str, candidates: Sequence[str], prompt_id: str = "") -> List[int]:
        ...


def validate_ranking(ranking: Sequence[int], n: int, prompt_id: str = "") -> List[int]:
    """Check ``ranking`` is a permutation of ``range(n)``."""
    try:
        ranking = [int(i) for i in ranking]
    except (TypeError, ValueError):
        raise JudgeError(f"ranking for {prompt_id!r} contains non-integer entries", prompt_id)
    if sorted(ranking) != list(range(n)):
        raise JudgeError(f"ranking {ranking} for {prompt_id!r} is not a permutation of {n} candidates", prompt_id)
    return ranking


class OracleJudge:
    """Ranks by the synthetic ground-truth rule; equal scores keep index order."""

    def __init__(self, rule: Union[str, SynthRule]):
        self.rule = parse_rule(rule)

    def rank(self, prompt: str, candidates: Sequence[str], prompt_id: str = "") -> List[int]:
        scores = [rule_score(self.rule, c) for c in candidates]
        ranking = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
        return validate_ranking(ranking, len(candidates), prompt_id)


class FileJudge:
    """Precomputed rankings from JSONL lines ``{"prompt_id": ..., "ranking": [...]}``."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.rankings: Dict[str, List[int]] = {}
        if not self.path.is_file():
            raise JudgeError(f"judge file not found: {self.path}")
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    self.rankings[str(row["prompt_id"])] = list(row["ranking"])
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise JudgeError(f"{self.path}:{line_number}: bad judge row ({e})")
        logger.info(f"loaded {len(self.rankings)} ranking(s) from {self.path}")

    def rank(self, prompt: str, candidates: Sequence[str], prompt_id: str = "") -> List[int]:
        if prompt_id not in self.rankings:
            raise JudgeError(f"judge file {self.path} has no ranking for prompt {prompt_id!r}", prompt_id)
        return validate_ranking(self.rankings[prompt_id], len(candidates), prompt_id)


def parse_judge(spec: str, default_rule: Optional[str] = None) -> Judge:
    """``oracle``, ``oracle:<rule>`` or ``file:<path>``; bare ``oracle`` uses ``default_rule``."""
    kind, _, arg = spec.partition(":")
    if kind == "oracle" and (arg or default_rule):
        return OracleJudge(arg or default_rule)
    if kind == "file" and arg:
        return FileJudge(arg)
    raise JudgeError(f"judge must be 'oracle[:<rule>]' or 'file:<path>', got {spec!r}")
