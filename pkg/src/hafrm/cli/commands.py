"""Subcommand implementations; each takes parsed args and returns an exit code"""

import argparse
import json
import logging
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from otel.metrics import record_checkpoint_saved

from ..config.schemas import RunConfig
from ..config.settings import resolve_seed
from ..data.records import PreferenceRecord, PromptRecord, load_jsonl, load_prompts, write_jsonl
from ..data.splits import MixSpec, mix_even, split
from ..data.stats import compute_stats, render_stats_table
from ..data.synth import parse_rule, scores_path_for, synth_candidates, synth_generate, write_scores
from ..eval.accuracy import ood_matrix, pairwise_accuracy
from ..eval.best_of_n import best_of_n_batch, top_k_recall
from ..eval.judges import parse_judge
from ..eval.reports import (
    write_accuracy_csv,
    write_bon_jsonl,
    write_json,
    write_ood_csv,
    write_recall_csv,
    write_series_csv,
)
from ..eval.sampling import sample_candidates
from ..eval.scorers import ImplicitRewardScorer, ModelScorer, Scorer
from ..eval.winrate import build_comparison_manifest, ingest_verdicts
from ..model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from ..model.transformer import DualHeadModel
from ..train.sweep import alpha_label, alpha_sweep
from ..train.trainer import fit, validation_scorer
from ..utils.constants import ObjectiveMode, RecallMode, SynthRule
from ..utils.exceptions import CheckpointError, ConfigError, NumericError
from .run_config import build_run_config, write_config
from .run_dir import RunDirectory

logger = logging.getLogger(__name__)

CONFIG_NAME = "config.json"


def parse_tagged(spec: str, default_tag: str) -> Tuple[str, Path]:
    """``TAG=PATH`` or a bare path; a ``=`` inside a path component is not a tag separator."""
    head, sep, tail = spec.partition("=")
    if sep and head and "/" not in head:
        return head, Path(tail)
    return default_tag, Path(spec)


def _unique_tags(pairs: Sequence[Tuple[str, Path]], what: str) -> Dict[str, Path]:
    out: Dict[str, Path] = {}
    for tag, path in pairs:
        if tag in out:
            raise ConfigError(f"duplicate {what} tag {tag!r}; use TAG=PATH to disambiguate", {"tag": tag})
        out[tag] = path
    return out


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}", {"path": str(path)})
    return path


def _load_records(paths: Sequence[str]) -> List[PreferenceRecord]:
    if not paths:
        raise ConfigError("no data files given (use --data)")
    records: List[PreferenceRecord] = []
    seen = set()
    for p in paths:
        for record in load_jsonl(_require_file(Path(p), "data file")):
            if record.id in seen:
                raise ConfigError(f"record id {record.id!r} appears in more than one data file")
            seen.add(record.id)
            records.append(record)
    return records


def _parse_floats(raw: str, what: str) -> List[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of numbers, got {raw!r}")


def _parse_ints(raw: str, what: str) -> List[int]:
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of integers, got {raw!r}")


def _sidecar_config(output: Path) -> Path:
    """``out/corpus.jsonl`` -> ``out/corpus.config.json``."""
    return output.with_suffix(".config.json")


def _check_output_file(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise ConfigError(f"{path} already exists; pass --force to overwrite it")


def _checkpoint_scorer(tag: str, path: Path, implicit: bool, reference: Optional[str]) -> Scorer:
    ckpt = load_checkpoint(_require_file(path, "checkpoint"))
    mode = ckpt.meta.get("mode")
    if not implicit:
        if mode == ObjectiveMode.DPO.value:
            logger.warning(f"{tag}: trained in dpo mode; its reward head is untrained (use --implicit)")
        return ModelScorer(ckpt.model)
    ref_path = Path(reference) if reference else path.parent / "reference.ckpt"
    if not ref_path.is_file():
        raise ConfigError(f"{tag}: --implicit needs a reference checkpoint, {ref_path} not found")
    ref = load_checkpoint(ref_path)
    if ref.model.config != ckpt.model.config:
        raise CheckpointError(f"{tag}: reference {ref_path} has a different model config", str(ref_path))
    return ImplicitRewardScorer(ckpt.model, ref.model)


def cmd_train(args: argparse.Namespace) -> int:
    config = build_run_config(args, "train", data=args.data or None, out_dir=args.out)
    if not config.out_dir:
        raise ConfigError("train needs an output directory (use --out)")
    records = _load_records(config.data)

    with RunDirectory(config.out_dir, force=args.force) as run_dir:
        write_config(config, run_dir / CONFIG_NAME)
        data = split(records, config.train.seed, config.test_frac, config.val_frac)
        write_json(
            {"train": [r.id for r in data.train], "validation": [r.id for r in data.validation], "test": [r.id for r in data.test]},
            run_dir / "split_ids.json",
        )
        model = DualHeadModel(config.model)
        try:
            result = fit(model, data, config.train, run_dir)
        except NumericError as e:
            write_json({"error": e.message, "code": e.code, **e.details}, run_dir / "numeric_abort.json")
            raise

        save_checkpoint(
            run_dir / "reference.ckpt",
            Checkpoint(model=result.reference, step=0, config_hash=result.best.config_hash, meta={"role": "reference"}),
        )
        record_checkpoint_saved("reference")

        summary = {
            "mode": result.log.header["mode"],
            "alpha": config.train.hybrid.alpha,
            "best_step": result.best.step,
            "best_val_accuracy": result.best.val_accuracy,
            "best_val_margin": result.best_margin,
            "final_step": result.final_step,
            "stopped_early": result.stopped_early,
            "n_train": len(data.train),
            "n_validation": len(data.validation),
            "n_test": len(data.test),
            "config_hash": config.content_hash(),
            "test_accuracy": None,
            "test_margin": None,
        }
        if data.test:
            scorer = validation_scorer(result.best.model, result.reference, config.train.objective_mode)
            test = pairwise_accuracy(scorer, data.test, dataset="test")
            summary["test_accuracy"] = test.accuracy
            summary["test_margin"] = test.margin
            logger.info(f"test accuracy of step {result.best.step}: {test.accuracy:.4f} over {test.n_pairs} pair(s)")
        write_json(summary, run_dir / "summary.json")
    print(f"best step {result.best.step}: val_accuracy={result.best.val_accuracy:.4f} -> {run_dir / 'best.ckpt'}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoints = _unique_tags([parse_tagged(s, Path(s).parent.name or Path(s).stem) for s in args.ckpt], "checkpoint")
    datasets_paths = _unique_tags([parse_tagged(s, Path(s).stem) for s in args.data], "dataset")
    groups: Dict[str, str] = {}
    if args.ood:
        with open(_require_file(Path(args.ood), "group map"), "r", encoding="utf-8") as f:
            try:
                groups = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"group map {args.ood} is not valid JSON: {e}")
        if not isinstance(groups, dict) or not all(isinstance(v, str) for v in groups.values()):
            raise ConfigError(f"group map {args.ood} must map dataset tags to group names")

    config = RunConfig.parse({
        "command": "eval",
        "data": [f"{tag}={path}" for tag, path in datasets_paths.items()],
        "groups": groups,
        "out_dir": args.report,
        "options": {
            "checkpoints": {tag: str(path) for tag, path in checkpoints.items()},
            "implicit": args.implicit,
            "reference": args.reference,
        },
    })
    scorers = {tag: _checkpoint_scorer(tag, path, args.implicit, args.reference) for tag, path in checkpoints.items()}
    datasets = {tag: load_jsonl(_require_file(path, "data file")) for tag, path in datasets_paths.items()}

    with RunDirectory(args.report, force=args.force) as report_dir:
        write_config(config, report_dir / CONFIG_NAME)
        if args.ood:
            matrix = ood_matrix(scorers, datasets, groups)
            rows = [matrix.reports[(r, c)] for r in matrix.rows for c in matrix.columns]
            write_ood_csv(matrix, report_dir / "ood_matrix.csv")
            write_json(
                {
                    "rows": matrix.rows,
                    "columns": matrix.columns,
                    "groups": matrix.groups,
                    "cells": matrix.cells,
                    "r_acc": matrix.r_acc,
                    "row_average": matrix.row_average,
                    "in_distribution_only": matrix.in_distribution_only,
                },
                report_dir / "ood_matrix.json",
            )
            tags = [r for r in matrix.rows for _ in matrix.columns]
        else:
            rows, tags = [], []
            for tag, scorer in scorers.items():
                for name, records in datasets.items():
                    rows.append(pairwise_accuracy(scorer, records, dataset=name))
                    tags.append(tag)

        write_accuracy_csv(rows, report_dir / "accuracy.csv", model=tags)
    for report, tag in zip(rows, tags):
        print(f"{tag:>16} {report.dataset:>16}  acc={report.accuracy:.4f}  n={report.n_pairs}")
    return 0


def _default_rule(prompts: Sequence[PromptRecord], explicit: Optional[str]) -> Optional[str]:
    if explicit:
        return parse_rule(explicit).value
    sources = Counter(p.source for p in prompts)
    if len(sources) == 1:
        source = next(iter(sources))
        if source in {r.value for r in SynthRule}:
            return source
    return None


def _candidate_pools(args: argparse.Namespace, model: DualHeadModel, prompts: Sequence[PromptRecord], seed: int, rule: Optional[str]) -> List[tuple]:
    pools = []
    if args.candidates == "synth":
        if rule is None:
            raise ConfigError("--candidates synth needs --rule or prompts generated by synth")
        rng = np.random.default_rng(seed)
        for p in prompts:
            pools.append((p.id, p.prompt, synth_candidates(rule, args.n, rng)))
        return pools
    for i, p in enumerate(prompts):
        candidates = sample_candidates(
            model, p.prompt, args.n, temperature=args.temperature, seed=[seed, i], max_new_tokens=args.max_new_tokens
        )
        pools.append((p.id, p.prompt, candidates))
    return pools


def cmd_bon(args: argparse.Namespace) -> int:
    if args.n < 2:
        raise ConfigError(f"--n must be at least 2, got {args.n}")
    ks = _parse_ints(args.k, "--k")
    seed = resolve_seed(args.seed, None)
    prompts_path = _require_file(Path(args.prompts), "prompts file")
    prompts = load_prompts(prompts_path)
    if args.limit is not None:
        prompts = prompts[: args.limit]
    if not prompts:
        raise ConfigError(f"no prompts in {prompts_path}")
    rule = _default_rule(prompts, args.rule)
    judge = parse_judge(args.judge, rule) if args.judge else None

    config = RunConfig.parse({
        "command": "bon",
        "data": [str(prompts_path)],
        "out_dir": args.out,
        "options": {
            "ckpt": args.ckpt,
            "against": args.against,
            "n": args.n,
            "temperature": args.temperature,
            "max_new_tokens": args.max_new_tokens,
            "candidates": args.candidates,
            "judge": args.judge,
            "rule": rule,
            "k": ks,
            "recall_mode": args.recall_mode,
            "limit": args.limit,
            "implicit": args.implicit,
            "seed": seed,
        },
    })
    ckpt_path = _require_file(Path(args.ckpt), "checkpoint")
    model = load_checkpoint(ckpt_path).model
    scorer = _checkpoint_scorer(ckpt_path.parent.name, ckpt_path, args.implicit, None)

    with RunDirectory(args.out, force=args.force) as out_dir:
        write_config(config, out_dir / CONFIG_NAME)
        pools = _candidate_pools(args, model, prompts, seed, rule)
        results = best_of_n_batch(scorer, pools, judge)
        write_bon_jsonl(results, out_dir / "bon.jsonl")

        if judge is None:
            logger.info("no judge given; skipping top-k recall")
            print("no judge given: wrote bon.jsonl only, recall skipped")
        else:
            dataset = prompts_path.stem
            reports = [top_k_recall(results, k, RecallMode(args.recall_mode), dataset=dataset) for k in ks]
            write_recall_csv(reports, out_dir / "recall.csv")
            for r in reports:
                print(f"top-{r.k} recall ({r.mode}) on {dataset}: {r.recall:.4f} over {r.n_prompts} prompt(s)")

        if args.against:
            other_path = _require_file(Path(args.against), "checkpoint")
            other = _checkpoint_scorer(other_path.parent.name, other_path, args.implicit, None)
            other_results = best_of_n_batch(other, pools)
            write_bon_jsonl(other_results, out_dir / "bon_against.jsonl")
            build_comparison_manifest(results, other_results, out_dir / "manifest.jsonl")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    alphas = _parse_floats(args.alphas, "--alphas")
    negative = [a for a in alphas if a < 0]
    if negative and not args.allow_negative:
        raise ConfigError(f"negative alpha {negative} needs --allow-negative")
    config = build_run_config(args, "sweep", data=args.data or None, out_dir=args.out, options={"alphas": alphas})
    if not config.out_dir:
        raise ConfigError("sweep needs an output directory (use --out)")
    records = _load_records(config.data)

    with RunDirectory(config.out_dir, force=args.force) as out_dir:
        write_config(config, out_dir / CONFIG_NAME)
        data = split(records, config.train.seed, config.test_frac, config.val_frac)
        result = alpha_sweep(data, config.train, alphas, config.model, out_dir)
        columns = [alpha_label(a) for a in result.alphas]
        write_series_csv(out_dir / "margin_vs_step.csv", result.steps, columns, [result.margin_series[a] for a in result.alphas])
        write_series_csv(out_dir / "acc_vs_step.csv", result.steps, columns, [result.accuracy_series[a] for a in result.alphas])
        write_json({"runs": result.summary(), "steps": result.steps}, out_dir / "sweep_summary.json")
    for row in result.summary():
        flag = " (negative alpha)" if row["negative_alpha"] else ""
        print(f"{alpha_label(row['alpha']):>12}  best_step={row['best_step']}  val_acc={row['best_val_accuracy']:.4f}{flag}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    rows = []
    for spec in args.data:
        tag, path = parse_tagged(spec, Path(spec).stem)
        rows.append(compute_stats(load_jsonl(_require_file(path, "data file")), name=tag))
    table = render_stats_table(rows)
    print(table)
    if args.out:
        config = RunConfig.parse({"command": "stats", "data": list(args.data), "out_dir": args.out})
        with RunDirectory(args.out, force=args.force) as out_dir:
            write_config(config, out_dir / CONFIG_NAME)
            write_json([r.to_dict() for r in rows], out_dir / "stats.json")
            (out_dir / "stats.txt").write_text(table + "\n", encoding="utf-8")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    rule = parse_rule(args.rule)
    seed = resolve_seed(args.seed, None)
    out = Path(args.out)
    scores_out = scores_path_for(out)
    for path in (out, scores_out, _sidecar_config(out)):
        _check_output_file(path, args.force)

    corpus = synth_generate(rule, args.n, seed)
    write_jsonl(corpus.records, out)
    write_scores(corpus, scores_out)
    config = RunConfig.parse({
        "command": "synth",
        "data": [str(out)],
        "options": {"rule": rule.value, "n": args.n, "seed": seed},
    })
    write_config(config, _sidecar_config(out))
    print(f"wrote {len(corpus.records)} {rule.value} record(s) to {out} (scores: {scores_out})")
    return 0


def cmd_mix(args: argparse.Namespace) -> int:
    seed = resolve_seed(args.seed, None)
    sources = _unique_tags([parse_tagged(s, Path(s).stem) for s in args.source], "source")
    out = Path(args.out)
    for path in (out, _sidecar_config(out)):
        _check_output_file(path, args.force)

    loaded = [(tag, load_jsonl(_require_file(path, "source file"), source=tag)) for tag, path in sources.items()]
    mixed = mix_even(MixSpec(sources=loaded, per_source_count=args.per_source, seed=seed))
    write_jsonl(mixed, out)
    config = RunConfig.parse({
        "command": "mix",
        "data": [f"{tag}={path}" for tag, path in sources.items()],
        "options": {"per_source": args.per_source, "seed": seed, "output": str(out)},
    })
    write_config(config, _sidecar_config(out))
    print(f"wrote {len(mixed)} record(s) from {len(loaded)} source(s) to {out}")
    return 0


def cmd_winrate(args: argparse.Namespace) -> int:
    manifest = _require_file(Path(args.manifest), "manifest")
    verdicts = _require_file(Path(args.verdicts), "verdicts file")
    report = ingest_verdicts(verdicts, manifest)
    rate = "n/a" if report.win_rate is None else f"{report.win_rate:.4f}"
    print(f"win rate {rate}: {report.wins} win(s), {report.losses} loss(es), {report.ties} tie(s) over {report.n}")
    if args.out:
        config = RunConfig.parse({"command": "winrate", "data": [str(manifest), str(verdicts)], "out_dir": args.out})
        with RunDirectory(args.out, force=args.force) as out_dir:
            write_config(config, out_dir / CONFIG_NAME)
            write_json(report.to_dict(), out_dir / "winrate.json")
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "bon": cmd_bon,
    "sweep": cmd_sweep,
    "stats": cmd_stats,
    "synth": cmd_synth,
    "mix": cmd_mix,
    "winrate": cmd_winrate,
}
