"""argparse surface of the ``hafrm`` command"""

import argparse

from ..utils.constants import ObjectiveMode, RecallMode, SynthRule


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--d-model", dest="d_model", type=int)
    g.add_argument("--n-layers", dest="n_layers", type=int)
    g.add_argument("--n-heads", dest="n_heads", type=int)
    g.add_argument("--max-seq-len", dest="max_seq_len", type=int)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--config", help="JSON run config; flags override its values")
    g.add_argument("--data", action="append", default=[], help="preference JSONL file (repeatable)")
    g.add_argument("--out", help="run directory")
    g.add_argument("--seed", type=int, help="overrides HAFRM_SEED and the config seed")
    g.add_argument("--lr", type=float)
    g.add_argument("--batch-size", dest="batch_size", type=int)
    g.add_argument("--max-steps", dest="max_steps", type=int)
    g.add_argument("--eval-every-frac", dest="eval_every_frac", type=float)
    g.add_argument("--weight-decay", dest="weight_decay", type=float)
    g.add_argument("--max-grad-norm", dest="max_grad_norm", type=float)
    g.add_argument("--patience", type=int, help="evaluations without improvement before stopping")
    g.add_argument("--tau", type=float, help="policy temperature")
    g.add_argument("--test-frac", dest="test_frac", type=float)
    g.add_argument("--val-frac", dest="val_frac", type=float)
    g.add_argument("--allow-negative", dest="allow_negative", action="store_true", help="accept alpha < 0")
    g.add_argument("--force", action="store_true", help="write into a non-empty run directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hafrm", description="Hybrid-aligned reward model training and evaluation")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a reward model")
    _add_train_flags(train)
    _add_model_flags(train)
    train.add_argument("--alpha", type=float, help="policy loss weight")
    train.add_argument("--mode", choices=[m.value for m in ObjectiveMode], help="objective (default: hybrid, baseline when alpha is 0)")

    sweep = sub.add_parser("sweep", help="train once per policy loss weight")
    _add_train_flags(sweep)
    _add_model_flags(sweep)
    sweep.add_argument("--alphas", required=True, help="comma-separated alphas, e.g. 0,0.1,0.2")

    ev = sub.add_parser("eval", help="pairwise accuracy and OOD matrix")
    ev.add_argument("--ckpt", action="append", required=True, help="[TAG=]PATH of a checkpoint (repeatable)")
    ev.add_argument("--data", action="append", required=True, help="[TAG=]PATH of a preference JSONL (repeatable)")
    ev.add_argument("--ood", help="JSON map of dataset/model tag to preference group")
    ev.add_argument("--report", required=True, help="report directory")
    ev.add_argument("--implicit", action="store_true", help="score with the implicit policy/reference reward")
    ev.add_argument("--reference", help="reference checkpoint for --implicit (default: beside each checkpoint)")
    ev.add_argument("--force", action="store_true")

    bon = sub.add_parser("bon", help="best-of-N selection and top-k recall")
    bon.add_argument("--ckpt", required=True)
    bon.add_argument("--prompts", required=True, help="JSONL with a 'prompt' field per line")
    bon.add_argument("--out", required=True)
    bon.add_argument("--n", type=int, default=4, help="candidates per prompt")
    bon.add_argument("--temperature", type=float, default=1.0)
    bon.add_argument("--max-new-tokens", dest="max_new_tokens", type=int, default=32)
    bon.add_argument("--candidates", choices=["model", "synth"], default="model", help="sample from the policy head or the synthetic generator")
    bon.add_argument("--rule", choices=[r.value for r in SynthRule], help="oracle rule (default: the prompts' source)")
    bon.add_argument("--judge", help="oracle[:<rule>] or file:<path>")
    bon.add_argument("--k", default="1,2", help="comma-separated k values for recall")
    bon.add_argument("--recall-mode", dest="recall_mode", choices=[m.value for m in RecallMode], default=RecallMode.MEMBERSHIP.value)
    bon.add_argument("--limit", type=int, help="use the first LIMIT prompts")
    bon.add_argument("--against", help="second checkpoint; writes a pairwise comparison manifest")
    bon.add_argument("--implicit", action="store_true")
    bon.add_argument("--seed", type=int)
    bon.add_argument("--force", action="store_true")

    stats = sub.add_parser("stats", help="dataset statistics table")
    stats.add_argument("data", nargs="+", help="[TAG=]PATH of a preference JSONL")
    stats.add_argument("--out", help="also write stats.json and stats.txt here")
    stats.add_argument("--force", action="store_true")

    synth = sub.add_parser("synth", help="generate a synthetic preference corpus")
    synth.add_argument("rule", help=", ".join(r.value for r in SynthRule))
    synth.add_argument("n", type=int)
    synth.add_argument("seed", type=int)
    synth.add_argument("out")
    synth.add_argument("--force", action="store_true")

    mix = sub.add_parser("mix", help="even per-source sample of several corpora")
    mix.add_argument("--source", action="append", required=True, help="[TAG=]PATH (repeatable)")
    mix.add_argument("--per-source", dest="per_source", type=int, required=True)
    mix.add_argument("--seed", type=int)
    mix.add_argument("--out", required=True)
    mix.add_argument("--force", action="store_true")

    winrate = sub.add_parser("winrate", help="win rate from external pairwise verdicts")
    winrate.add_argument("manifest")
    winrate.add_argument("verdicts")
    winrate.add_argument("--out")
    winrate.add_argument("--force", action="store_true")

    return parser
