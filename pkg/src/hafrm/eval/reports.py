"""CSV / JSON / JSONL writers for evaluation reports"""

import csv
import json
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

from ..utils.exceptions import ContractError
from .accuracy import AccuracyReport, OODMatrix
from .best_of_n import BestOfNResult, RecallReport

PathLike = Union[str, Path]


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_json(obj: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_accuracy_csv(reports: Iterable[AccuracyReport], path: PathLike, model: Union[str, Sequence[str]] = "") -> Path:
    """Columns: model, dataset, n, correct, accuracy, margin.

    ``model`` is one tag for every row or a tag per row.
    """
    reports = list(reports)
    tags = [model] * len(reports) if isinstance(model, str) else list(model)
    if len(tags) != len(reports):
        raise ContractError(f"{len(tags)} model tag(s) for {len(reports)} report(s)")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["model", "dataset", "n", "correct", "accuracy", "margin"])
        for tag, r in zip(tags, reports):
            writer.writerow([tag, r.dataset, r.n_pairs, r.n_correct, _fmt(r.accuracy), _fmt(r.margin)])
    return path


def write_ood_csv(matrix: OODMatrix, path: PathLike) -> Path:
    """Row tag x column tag grid followed by avg, rAcc and in_distribution_only columns."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["train\\eval"] + matrix.columns + ["avg", "rAcc", "in_distribution_only"])
        for i, row in enumerate(matrix.rows):
            writer.writerow(
                [row]
                + [_fmt(c) for c in matrix.cells[i]]
                + [_fmt(matrix.row_average[row]), _fmt(matrix.r_acc[row]), str(matrix.in_distribution_only[row]).lower()]
            )
    return path


def write_bon_jsonl(results: Iterable[BestOfNResult], path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for r in results:
            f.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
    return path


def write_recall_csv(reports: Iterable[RecallReport], path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["dataset", "k", "mode", "n_prompts", "recall"])
        for r in reports:
            writer.writerow([r.dataset, r.k, r.mode, r.n_prompts, _fmt(r.recall)])
    return path


def write_series_csv(path: PathLike, steps: Sequence[int], columns: Sequence[str], series: Sequence[List[Optional[float]]]) -> Path:
    """Wide table: one ``step`` column then one column per series; missing cells are empty."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["step"] + list(columns))
        for i, step in enumerate(steps):
            writer.writerow([step] + [_fmt(s[i]) for s in series])
    return path
