"""Pairwise accuracy and the cross-dataset (OOD) accuracy matrix"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from opentelemetry import trace

from otel.metrics import record_eval_run

from ..data.records import PreferenceRecord
from ..model.transformer import DualHeadModel
from ..utils.exceptions import ConfigError, ContractError
from .scorers import Scorer, as_scorer

logger = logging.getLogger(__name__)
tracer = trace.get_tracer("hafrm-eval")


@dataclass
class AccuracyReport:
    """Share of pairs whose chosen response out-scores the rejected one; ties count as wrong."""

    dataset: str
    n_pairs: int
    n_correct: int
    accuracy: float
    margin: float
    mean_chosen_reward: float = 0.0


def pairwise_accuracy(
    model: Union[DualHeadModel, Scorer],
    records: Sequence[PreferenceRecord],
    dataset: Optional[str] = None,
) -> AccuracyReport:
    """A pair is correct iff reward(prompt, chosen) > reward(prompt, rejected).

    Raises:
        ContractError: If ``records`` is empty
    """
    if not records:
        raise ContractError("pairwise_accuracy needs at least one record")
    scorer = as_scorer(model)
    start = time.perf_counter()
    with tracer.start_as_current_span("pairwise_accuracy") as span:
        items = [(r.prompt, r.chosen) for r in records] + [(r.prompt, r.rejected) for r in records]
        rewards = scorer.score(items)
        n = len(records)
        diff = rewards[:n] - rewards[n:]
        n_correct = int(np.count_nonzero(diff > 0))
        report = AccuracyReport(
            dataset=dataset if dataset is not None else records[0].source,
            n_pairs=n,
            n_correct=n_correct,
            accuracy=n_correct / n,
            margin=float(np.mean(diff)),
            mean_chosen_reward=float(np.mean(rewards[:n])),
        )
        span.set_attribute("dataset", report.dataset)
        span.set_attribute("accuracy", report.accuracy)
    record_eval_run("accuracy", n, (time.perf_counter() - start) * 1000)
    return report


@dataclass
class OODMatrix:
    """Accuracy of each trained model (row) on each evaluation dataset (column).

    ``r_acc[row]`` averages the cells whose column is another dataset of the
    row's preference group. Rows with no such column report the diagonal
    accuracy and are flagged ``in_distribution_only``.
    """

    rows: List[str]
    columns: List[str]
    groups: Dict[str, str]
    cells: List[List[float]]
    reports: Dict[Tuple[str, str], AccuracyReport] = field(default_factory=dict)
    r_acc: Dict[str, Optional[float]] = field(default_factory=dict)
    row_average: Dict[str, float] = field(default_factory=dict)
    in_distribution_only: Dict[str, bool] = field(default_factory=dict)

    def cell(self, row: str, column: str) -> float:
        return self.cells[self.rows.index(row)][self.columns.index(column)]

    def r_acc_columns(self, row: str) -> List[str]:
        """Columns counted in the row's rAcc: same group, not the training dataset."""
        return [c for c in self.columns if c != row and self.groups[c] == self.groups[row]]


def _check_groups(tags: Sequence[str], groups: Mapping[str, str]) -> None:
    for tag in tags:
        if tag not in groups:
            raise ConfigError(f"group map has no entry for dataset {tag!r}", {"tag": tag})


def ood_matrix(
    models: Mapping[str, Union[DualHeadModel, Scorer]],
    datasets: Mapping[str, Sequence[PreferenceRecord]],
    groups: Mapping[str, str],
) -> OODMatrix:
    """Full cross matrix of pairwise accuracies plus rAcc and row averages.

    Raises:
        ConfigError: No models or datasets, or a tag without a group
    """
    if not models or not datasets:
        raise ConfigError("ood_matrix needs at least one model and one dataset")
    rows, columns = list(models), list(datasets)
    _check_groups(rows + columns, groups)

    start = time.perf_counter()
    with tracer.start_as_current_span("ood_matrix") as span:
        span.set_attribute("rows", len(rows))
        span.set_attribute("columns", len(columns))
        matrix = OODMatrix(rows=rows, columns=columns, groups={t: groups[t] for t in rows + columns}, cells=[])
        for row in rows:
            scorer = as_scorer(models[row])
            line = []
            for column in columns:
                report = pairwise_accuracy(scorer, datasets[column], dataset=column)
                matrix.reports[(row, column)] = report
                line.append(report.accuracy)
            matrix.cells.append(line)
            matrix.row_average[row] = float(np.mean(line))

            designated = matrix.r_acc_columns(row)
            if designated:
                matrix.r_acc[row] = float(np.mean([matrix.cell(row, c) for c in designated]))
                matrix.in_distribution_only[row] = False
            else:
                matrix.r_acc[row] = matrix.cell(row, row) if row in columns else None
                matrix.in_distribution_only[row] = True
            logger.info(f"OOD row {row}: rAcc={matrix.r_acc[row]} avg={matrix.row_average[row]:.4f}")
    record_eval_run("ood", len(rows) * len(columns), (time.perf_counter() - start) * 1000)
    return matrix


@dataclass
class OODDelta:
    """Cell-wise ``a - b`` of two matrices over the same grid."""

    rows: List[str]
    columns: List[str]
    cells: List[List[float]]
    r_acc: Dict[str, Optional[float]]
    row_average: Dict[str, float]


def ood_delta(a: OODMatrix, b: OODMatrix) -> OODDelta:
    if a.rows != b.rows or a.columns != b.columns:
        raise ContractError("ood_delta needs matrices with identical rows and columns")
    cells = [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a.cells, b.cells)]
    r_acc = {
        row: (a.r_acc[row] - b.r_acc[row]) if a.r_acc[row] is not None and b.r_acc[row] is not None else None
        for row in a.rows
    }
    return OODDelta(
        rows=list(a.rows),
        columns=list(a.columns),
        cells=cells,
        r_acc=r_acc,
        row_average={row: a.row_average[row] - b.row_average[row] for row in a.rows},
    )
