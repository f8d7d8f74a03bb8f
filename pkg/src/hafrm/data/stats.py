"""Dataset statistics in the Size / Words per QA / Tokens per QA layout"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence

from ..model.tokenizer import BYTE_VOCAB, Vocab, tokenize
from .records import PreferenceRecord

STATS_COLUMNS = ("Name", "Size", "Words/QA", "Tokens/QA")


@dataclass
class DatasetStats:
    name: str
    size: int
    words_per_qa: float
    tokens_per_qa: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def compute_stats(records: Sequence[PreferenceRecord], vocab: Vocab = BYTE_VOCAB, name: str = "") -> DatasetStats:
    """Each record counts as two QA instances: prompt + chosen and prompt + rejected."""
    if not records:
        return DatasetStats(name=name, size=0, words_per_qa=0.0, tokens_per_qa=0.0)
    words = 0
    tokens = 0
    for r in records:
        prompt_words = len(r.prompt.split())
        prompt_tokens = len(tokenize(r.prompt, vocab))
        for response in (r.chosen, r.rejected):
            words += prompt_words + len(response.split())
            tokens += prompt_tokens + len(tokenize(response, vocab))
    n_qa = 2 * len(records)
    return DatasetStats(name=name, size=len(records), words_per_qa=words / n_qa, tokens_per_qa=tokens / n_qa)


def render_stats_table(rows: Sequence[DatasetStats]) -> str:
    """Aligned text table, one row per dataset in input order."""
    cells: List[List[str]] = [list(STATS_COLUMNS)]
    for s in rows:
        cells.append([s.name, str(s.size), f"{s.words_per_qa:.2f}", f"{s.tokens_per_qa:.2f}"])
    widths = [max(len(row[i]) for row in cells) for i in range(len(STATS_COLUMNS))]
    lines = []
    for row in cells:
        first = row[0].ljust(widths[0])
        rest = [row[i].rjust(widths[i]) for i in range(1, len(row))]
        lines.append("  ".join([first] + rest))
    return "\n".join(lines) + "\n"
