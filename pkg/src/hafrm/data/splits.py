"""Seeded train/validation/test splits and even mixing across sources"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Set, Tuple

import numpy as np

from ..utils.exceptions import ConfigError, ContractError, DataError
from .records import PreferenceRecord

logger = logging.getLogger(__name__)


@dataclass
class DatasetSplit:
    """Disjoint partition of a record list."""

    train: List[PreferenceRecord]
    validation: List[PreferenceRecord]
    test: List[PreferenceRecord]
    seed: int
    test_frac: float
    val_frac: float

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def _count(frac: float, n: int) -> int:
    # tolerance keeps 0.1 * 100 at 10 despite binary rounding
    return int(math.floor(frac * n + 1e-9))


def split(
    records: Sequence[PreferenceRecord],
    seed: int,
    test_frac: float = 0.1,
    val_frac: float = 0.05,
) -> DatasetSplit:
    """Shuffle with ``seed`` and carve test first, then validation; the rest is train.

    Raises:
        ContractError: Fewer than 3 records
        ConfigError: A fraction is negative or they sum to 1 or more
    """
    if len(records) < 3:
        raise ContractError(f"split needs at least 3 records, got {len(records)}")
    if test_frac < 0 or val_frac < 0 or test_frac + val_frac >= 1:
        raise ConfigError(
            f"split fractions must be >= 0 and sum to < 1, got test={test_frac} val={val_frac}",
            {"test_frac": test_frac, "val_frac": val_frac},
        )
    n = len(records)
    n_test = _count(test_frac, n)
    n_val = min(_count(val_frac, n), n - n_test)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [records[int(i)] for i in order]
    result = DatasetSplit(
        train=shuffled[n_test + n_val:],
        validation=shuffled[n_test:n_test + n_val],
        test=shuffled[:n_test],
        seed=seed,
        test_frac=test_frac,
        val_frac=val_frac,
    )
    logger.info(f"split {n} records (seed {seed}): train={len(result.train)} val={n_val} test={n_test}")
    return result


@dataclass
class MixSpec:
    """Sources to sample from, ``per_source_count`` records each."""

    sources: List[Tuple[str, List[PreferenceRecord]]]
    per_source_count: int
    seed: int = 0


def mix_even(spec: MixSpec) -> List[PreferenceRecord]:
    """Seeded sample of exactly ``per_source_count`` records per source, shuffled together.

    Records are re-tagged with their source name. Ids that collide across
    sources are prefixed with the source tag.

    Raises:
        DataError: A source has fewer records than requested
    """
    if spec.per_source_count < 0:
        raise ConfigError(f"per_source_count must be >= 0, got {spec.per_source_count}")
    for tag, records in spec.sources:
        if len(records) < spec.per_source_count:
            raise DataError(
                f"source {tag!r} has {len(records)} record(s), {spec.per_source_count} requested",
                {"source": tag, "available": len(records), "requested": spec.per_source_count},
            )

    rng = np.random.default_rng(spec.seed)
    mixed: List[PreferenceRecord] = []
    seen_ids: Set[str] = set()
    for tag, records in spec.sources:
        picks = np.sort(rng.choice(len(records), size=spec.per_source_count, replace=False)) if records else []
        for i in picks:
            record = records[int(i)]
            new_id = record.id if record.id not in seen_ids else f"{tag}/{record.id}"
            seen_ids.add(new_id)
            mixed.append(record.model_copy(update={"source": tag, "id": new_id}))

    order = rng.permutation(len(mixed))
    return [mixed[int(i)] for i in order]
