from .records import PreferenceRecord, PromptRecord, load_jsonl, load_prompts, make_record, write_jsonl
from .splits import DatasetSplit, MixSpec, mix_even, split
from .stats import STATS_COLUMNS, DatasetStats, compute_stats, render_stats_table
from .synth import (
    HARM_WORD,
    MARKER_WORD,
    SynthCorpus,
    parse_rule,
    read_scores,
    rule_score,
    scores_path_for,
    synth_candidates,
    synth_generate,
    write_scores,
)
from .batching import PreferenceBatch, encode_records, iter_batches

__all__ = [
    "PreferenceRecord",
    "load_jsonl",
    "PromptRecord",
    "load_prompts",
    "make_record",
    "write_jsonl",
    "DatasetSplit",
    "MixSpec",
    "mix_even",
    "split",
    "STATS_COLUMNS",
    "DatasetStats",
    "compute_stats",
    "render_stats_table",
    "HARM_WORD",
    "MARKER_WORD",
    "SynthCorpus",
    "parse_rule",
    "read_scores",
    "rule_score",
    "scores_path_for",
    "synth_candidates",
    "synth_generate",
    "write_scores",
    "PreferenceBatch",
    "encode_records",
    "iter_batches",
]
