"""Synthetic preference corpora with a known ground-truth scorer.

Responses are sequences of four-letter filler words. Each rule scores a
response from its words alone:

- ``marker-count``: number of ``zest`` tokens (more is better)
- ``length-band``: minus the distance of the word count from the band [8, 12]
- ``keyword-safety``: minus the number of ``jinx`` tokens (the harmful marker)

The chosen response of every generated pair scores strictly higher than the
rejected one, so no pair is a tie.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from ..utils.constants import SynthRule
from ..utils.exceptions import ConfigError, ContractError, DataError
from .records import PreferenceRecord

logger = logging.getLogger(__name__)

FILLER_WORDS = (
    "blue", "cold", "dark", "easy", "fair", "gold", "high", "kind", "long", "mild",
    "neat", "open", "pure", "rich", "soft", "tall", "warm", "wide", "calm", "bold",
)
MARKER_WORD = "zest"
HARM_WORD = "jinx"
LENGTH_BAND = (8, 12)

PROMPT_VERBS = ("describe", "list", "name", "recall", "picture", "sketch")
PROMPT_NOUNS = ("river", "garden", "market", "harbor", "forest", "meadow", "castle", "orchard")


def parse_rule(rule: Union[str, SynthRule]) -> SynthRule:
    try:
        return SynthRule(rule)
    except ValueError:
        known = ", ".join(r.value for r in SynthRule)
        raise ConfigError(f"unknown synthetic rule {rule!r} (known: {known})", {"rule": str(rule)})


def _band_distance(n_words: int) -> int:
    low, high = LENGTH_BAND
    if n_words < low:
        return low - n_words
    if n_words > high:
        return n_words - high
    return 0


def rule_score(rule: Union[str, SynthRule], text: str) -> float:
    """Ground-truth score of ``text`` under ``rule``."""
    rule = parse_rule(rule)
    words = text.split()
    if rule == SynthRule.MARKER_COUNT:
        return float(words.count(MARKER_WORD))
    if rule == SynthRule.LENGTH_BAND:
        return -float(_band_distance(len(words)))
    return -float(words.count(HARM_WORD))


def _filler(rng: np.random.Generator, length: int, special: str = "", count: int = 0) -> str:
    words = [FILLER_WORDS[int(i)] for i in rng.integers(0, len(FILLER_WORDS), size=length)]
    if count:
        for pos in rng.choice(length, size=count, replace=False):
            words[int(pos)] = special
    return " ".join(words)


def _prompt(rng: np.random.Generator) -> str:
    verb = PROMPT_VERBS[int(rng.integers(0, len(PROMPT_VERBS)))]
    noun = PROMPT_NOUNS[int(rng.integers(0, len(PROMPT_NOUNS)))]
    return f"{verb} the {noun} in a few words"


def _pair(rule: SynthRule, rng: np.random.Generator) -> Tuple[str, str]:
    """(better, worse) responses with strictly different scores."""
    if rule == SynthRule.LENGTH_BAND:
        while True:
            a, b = (int(x) for x in rng.integers(3, 17, size=2))
            if _band_distance(a) != _band_distance(b):
                break
        better, worse = (a, b) if _band_distance(a) < _band_distance(b) else (b, a)
        return _filler(rng, better), _filler(rng, worse)

    length = int(rng.integers(4, 9))
    if rule == SynthRule.MARKER_COUNT:
        a = int(rng.integers(0, 4))
        b = (a + int(rng.integers(1, 4))) % 4
        hi, lo = max(a, b), min(a, b)
        return _filler(rng, length, MARKER_WORD, hi), _filler(rng, length, MARKER_WORD, lo)

    a = int(rng.integers(0, 3))
    b = (a + int(rng.integers(1, 3))) % 3
    return _filler(rng, length, HARM_WORD, min(a, b)), _filler(rng, length, HARM_WORD, max(a, b))


def synth_candidates(rule: Union[str, SynthRule], n: int, rng: np.random.Generator) -> List[str]:
    """``n`` independent responses from the rule's grammar; scores may tie."""
    rule = parse_rule(rule)
    out = []
    for _ in range(n):
        if rule == SynthRule.LENGTH_BAND:
            out.append(_filler(rng, int(rng.integers(3, 17))))
        elif rule == SynthRule.MARKER_COUNT:
            out.append(_filler(rng, int(rng.integers(4, 9)), MARKER_WORD, int(rng.integers(0, 4))))
        else:
            out.append(_filler(rng, int(rng.integers(4, 9)), HARM_WORD, int(rng.integers(0, 3))))
    return out


@dataclass
class SynthCorpus:
    """Generated records and their hidden (chosen, rejected) scores by id."""

    rule: SynthRule
    seed: int
    records: List[PreferenceRecord]
    scores: Dict[str, Tuple[float, float]] = field(default_factory=dict)


def synth_generate(rule: Union[str, SynthRule], n: int, seed: int) -> SynthCorpus:
    """Generate ``n`` strictly ordered preference pairs from one seeded stream.

    Raises:
        ConfigError: Unknown rule id
        ContractError: n < 1
    """
    rule = parse_rule(rule)
    if n < 1:
        raise ContractError(f"synth_generate needs n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    records: List[PreferenceRecord] = []
    scores: Dict[str, Tuple[float, float]] = {}
    for i in range(n):
        prompt = _prompt(rng)
        chosen, rejected = _pair(rule, rng)
        record_id = f"{rule.value}-{seed}-{i:06d}"
        records.append(PreferenceRecord(id=record_id, prompt=prompt, chosen=chosen, rejected=rejected, source=rule.value))
        scores[record_id] = (rule_score(rule, chosen), rule_score(rule, rejected))
    logger.info(f"generated {n} {rule.value} pair(s) with seed {seed}")
    return SynthCorpus(rule=rule, seed=seed, records=records, scores=scores)


def scores_path_for(corpus_path: Union[str, Path]) -> Path:
    """``synth.jsonl`` -> ``synth.scores.jsonl``."""
    return Path(corpus_path).with_suffix(".scores.jsonl")


def write_scores(corpus: SynthCorpus, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for record in corpus.records:
            chosen, rejected = corpus.scores[record.id]
            row = {"id": record.id, "rule": corpus.rule.value, "chosen_score": chosen, "rejected_score": rejected}
            f.write(json.dumps(row) + "\n")
    return path


def read_scores(path: Union[str, Path]) -> Dict[str, Tuple[float, float]]:
    path = Path(path)
    scores: Dict[str, Tuple[float, float]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                scores[row["id"]] = (float(row["chosen_score"]), float(row["rejected_score"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise DataError(f"{path}:{line_number}: bad score row ({e})", {"line": line_number})
    return scores
