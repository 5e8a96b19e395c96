#!/usr/bin/env python3
"""CLI utility for the kgsym pipeline."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from pathlib import Path

import kgsym
from kgsym.api import circle_gen, complete, evaluate_checkpoint, stats, train_model
from kgsym.config import default_workers, resolve_train_config
from kgsym.errors import KgsymError
from kgsym.kg_constants import DEFAULT_THRESHOLD, CompletionScope, LossReduction, Norm, Split, TripleFormat
from kgsym.render import render_circle, render_completion, render_eval, render_stats


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        dest="fmt",
        choices=[fmt.value for fmt in TripleFormat],
        default=TripleFormat.NAMES.value,
        help="Dataset layout: 'names' (train.txt ...) or 'ids' (train2id.txt ...) (default: names)",
    )


def _add_threshold(parser: argparse.ArgumentParser, default: float | None = DEFAULT_THRESHOLD) -> None:
    parser.add_argument(
        "--threshold",
        type=float,
        default=default,
        help=f"Symmetry ratio at which a relation counts as symmetric (default: {DEFAULT_THRESHOLD})",
    )


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with every subcommand."""
    parser = argparse.ArgumentParser(
        prog="kgsym",
        description="Translational knowledge graph embeddings with bi-vector symmetric relations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Symmetry statistics of a dataset
  kgsym stats data/WN18

  # Complete the missing reverses of symmetric relations
  kgsym complete data/WN18 data/WN18-SYM

  # Train TransE with bi-vector symmetric relations
  kgsym train data/WN18-SYM runs/transe-sym --model transe --sym

  # Evaluate, including the circle triple test
  kgsym circle-gen data/WN18-SYM circles.txt
  kgsym eval runs/transe-sym/checkpoint.kge data/WN18-SYM --circle circles.txt
        """,
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level for stderr (default: WARNING)",
    )
    parser.add_argument("--log-file", default=None, help="Also write the log to this file")
    parser.add_argument("--version", action="version", version=f"kgsym {kgsym.__version__}")

    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    stats_parser = commands.add_parser("stats", help="Dataset and relation symmetry statistics")
    stats_parser.add_argument("data_dir", help="Dataset directory")
    _add_threshold(stats_parser)
    _add_format(stats_parser)
    stats_parser.add_argument(
        "--basis",
        choices=[Split.ALL.value, Split.TRAIN.value],
        default=Split.ALL.value,
        help="Split the symmetry ratios are computed over (default: all)",
    )
    stats_parser.add_argument("--json", dest="json_path", default=None, help="Also write the report as JSON")

    complete_parser = commands.add_parser("complete", help="Add the missing reverses of symmetric relations")
    complete_parser.add_argument("data_dir", help="Dataset directory")
    complete_parser.add_argument("out_dir", help="Directory for the completed dataset (names layout)")
    _add_threshold(complete_parser)
    _add_format(complete_parser)
    complete_parser.add_argument(
        "--scope",
        choices=[scope.value for scope in CompletionScope],
        default=CompletionScope.ALL_SPLITS.value,
        help="Complete the train split only or all splits (default: all)",
    )
    complete_parser.add_argument(
        "--no-leakage-guard",
        dest="leakage_guard",
        action="store_false",
        help="Also add reverses that already live in another split",
    )

    train_parser = commands.add_parser("train", help="Train a model")
    train_parser.add_argument("data_dir", help="Dataset directory")
    train_parser.add_argument("out_dir", help="Output directory for checkpoint, history and manifest")
    train_parser.add_argument("--config", default=None, help="JSON config file, keys mirror these flags")
    train_parser.add_argument("--model", default=None, help="transe, transh, transd or a -sym alias (default: transe)")
    train_parser.add_argument(
        "--sym",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Hold symmetric relations as plus/minus vector pairs",
    )
    train_parser.add_argument("--dim", type=int, default=None, help="Embedding dimension (default: 50)")
    train_parser.add_argument("--margin", type=float, default=None, help="Margin of the ranking loss (default: 1.0)")
    train_parser.add_argument("--lr", type=float, default=None, help="SGD learning rate (default: 0.01)")
    train_parser.add_argument("--epochs", type=int, default=None, help="Epochs (default: 500)")
    train_parser.add_argument("--batch", type=int, default=None, help="Minibatch size (default: 1024)")
    train_parser.add_argument("--negatives", type=int, default=None, help="Negatives per positive (default: 1)")
    train_parser.add_argument(
        "--reduction",
        choices=[reduction.value for reduction in LossReduction],
        default=None,
        help="Combine a positive's negatives by sum or mean (default: sum)",
    )
    train_parser.add_argument(
        "--norm",
        choices=[norm.value for norm in Norm],
        default=None,
        help="Score norm (default: l1 for TransE, l2 otherwise)",
    )
    train_parser.add_argument("--seed", type=int, default=None, help="Seed of every random draw (default: 0)")
    _add_threshold(train_parser, default=None)
    train_parser.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Single update stream with bit-identical reruns (default: on)",
    )
    train_parser.add_argument("--workers", type=int, default=None, help="Gradient threads in non-deterministic mode")
    train_parser.add_argument("--valid-every", type=int, default=None, help="Report validation metrics every N epochs")
    train_parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    _add_format(train_parser)

    eval_parser = commands.add_parser("eval", help="Evaluate a checkpoint")
    eval_parser.add_argument("checkpoint", help="Checkpoint file")
    eval_parser.add_argument("data_dir", help="Dataset directory the checkpoint was trained on")
    eval_parser.add_argument(
        "--mode",
        choices=["raw", "filtered", "both"],
        default="both",
        help="Ranking setting (default: both)",
    )
    eval_parser.add_argument("--circle", default=None, help="Circle triple file for the degeneration test")
    eval_parser.add_argument("--out-dir", default=None, help="Where eval.json goes (default: next to the checkpoint)")
    eval_parser.add_argument("--workers", type=int, default=None, help="Ranking threads (default: KGSYM_WORKERS or 1)")
    eval_parser.add_argument(
        "--norm",
        choices=[norm.value for norm in Norm],
        default=None,
        help="Override the norm stored in the checkpoint",
    )
    eval_parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    _add_format(eval_parser)

    circle_parser = commands.add_parser("circle-gen", help="Generate reflexive circle triples")
    circle_parser.add_argument("data_dir", help="Dataset directory")
    circle_parser.add_argument("out_path", help="Output file (names layout)")
    circle_parser.add_argument("--n", type=int, default=10_000, help="Number of triples (default: 10000)")
    circle_parser.add_argument("--seed", type=int, default=0, help="Generator seed (default: 0)")
    _add_threshold(circle_parser)
    _add_format(circle_parser)

    return parser


def configure_logging(level: str, log_file: str | None = None) -> None:
    """Send log records to stderr and optionally a file."""
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, handlers=handlers, force=True)


def _cmd_stats(args: argparse.Namespace) -> int:
    report = stats(args.data_dir, args.threshold, args.fmt, args.basis)
    print(render_stats(report))
    if args.json_path:
        path = Path(args.json_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_complete(args: argparse.Namespace) -> int:
    completion = complete(args.data_dir, args.out_dir, args.threshold, args.scope, args.fmt, args.leakage_guard)
    print(render_completion(completion))
    print(f"\nadded {completion.total_added} triples, written to {args.out_dir}")
    return 0


def _cmd_train(args: argparse.Namespace, argv: list[str]) -> int:
    overrides = {
        "model": args.model,
        "sym": args.sym,
        "dim": args.dim,
        "margin": args.margin,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch": args.batch,
        "negatives": args.negatives,
        "reduction": args.reduction,
        "norm": args.norm,
        "seed": args.seed,
        "threshold": args.threshold,
        "deterministic": args.deterministic,
        "workers": args.workers,
        "valid_every": args.valid_every,
    }
    config = resolve_train_config(overrides, args.config)
    result = train_model(args.data_dir, args.out_dir, config, args.fmt, ["kgsym", *argv], args.progress)
    final = result.history.final
    if final is None:
        print(f"{config.model_name}: 0 epochs, checkpoint holds the initialization")
    else:
        print(f"{config.model_name}: {final.epoch} epochs, final mean loss {final.mean_loss:.6f}")
    print(f"outputs written to {args.out_dir}")
    return 0


def _cmd_eval(args: argparse.Namespace, argv: list[str]) -> int:
    workers = default_workers() if args.workers is None else args.workers
    outcome = evaluate_checkpoint(
        args.checkpoint,
        args.data_dir,
        mode=args.mode,
        circle=args.circle,
        fmt=args.fmt,
        workers=workers,
        norm=args.norm,
        out_dir=args.out_dir,
        command=["kgsym", *argv],
        progress=args.progress,
    )
    print(render_eval(outcome.reports, outcome.model_name))
    if outcome.circle is not None:
        print()
        print(render_circle(outcome.circle, outcome.model_name))
    return 0


def _cmd_circle_gen(args: argparse.Namespace) -> int:
    triples = circle_gen(args.data_dir, args.out_path, args.n, args.seed, args.threshold, args.fmt)
    print(f"wrote {len(triples)} circle triples to {args.out_path}")
    return 0


def _error(kind: str, message: object) -> int:
    print(f"kgsym: error: {kind}: {message}", file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)

    try:
        configure_logging(args.log_level, args.log_file)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "complete":
            return _cmd_complete(args)
        if args.command == "train":
            return _cmd_train(args, argv)
        if args.command == "eval":
            return _cmd_eval(args, argv)
        return _cmd_circle_gen(args)

    except (FileNotFoundError, OSError) as e:
        return _error("io", e)
    except KgsymError as e:
        return _error(e.kind, e)
    except ValueError as e:
        return _error("config", e)
    except KeyboardInterrupt:
        return 130
    except Exception as e:  # noqa: BLE001
        return _error("internal", e)


if __name__ == "__main__":
    sys.exit(main())
