"""System constants and enums for reward model training"""

from enum import Enum


class ObjectiveMode(str, Enum):
    """Which loss drives the parameter update"""

    HYBRID = "hybrid"
    BASELINE = "baseline"
    DPO = "dpo"


class RecallMode(str, Enum):
    """How top-k agreement with a judge is counted"""

    MEMBERSHIP = "membership"
    OVERLAP = "overlap"


class SynthRule(str, Enum):
    """Built-in ground-truth preference rules for synthetic corpora"""

    MARKER_COUNT = "marker-count"
    LENGTH_BAND = "length-band"
    KEYWORD_SAFETY = "keyword-safety"


CHECKPOINT_FORMAT = "hafrm-ckpt-v1"

# Byte-level vocabulary: ids 0..255 are raw bytes, specials follow.
BYTE_VOCAB_SIZE = 256
PAD_ID = 256
BOS_ID = 257
SEP_ID = 258
VOCAB_SIZE = 259

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
