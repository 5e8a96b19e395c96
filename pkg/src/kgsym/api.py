"""Public API for kgsym - whole pipeline steps on dataset directories."""

from __future__ import annotations

import json
import logging

from collections.abc import Sequence
from pathlib import Path
from typing import Any
from typing import NamedTuple

from . import __version__
from .config import TrainConfig
from .errors import ConstraintError
from .evaluation import CircleReport
from .evaluation import EvalReport
from .evaluation import circle_eval
from .evaluation import evaluate_both
from .kg_constants import DEFAULT_THRESHOLD
from .kg_constants import CompletionScope
from .kg_constants import EvalMode
from .kg_constants import Norm
from .kg_constants import Split
from .kg_constants import TripleFormat
from .kg_data.circle import generate_circle_set
from .kg_data.loader import dataset_files
from .kg_data.loader import load_dataset
from .kg_data.loader import load_probe_triples
from .kg_data.loader import save_store
from .kg_data.loader import write_triples
from .kg_data.symmetry import classify_symmetric
from .kg_data.symmetry import complete_symmetric
from .kg_data.symmetry import dataset_stats
from .kg_defs import Completion
from .kg_defs import StatsReport
from .kg_defs import Triple
from .manifest import MANIFEST_NAME
from .manifest import RunManifest
from .manifest import dataset_fingerprint
from .manifest import read_manifest
from .models.checkpoint import load_checkpoint
from .models.checkpoint import save_checkpoint
from .training import TrainResult
from .training import train
from .training import write_history


logger = logging.getLogger(__name__)

# Output directory layout
CHECKPOINT_NAME = "checkpoint.kge"
HISTORY_NAME = "history.tsv"
HISTORY_JSON_NAME = "history.json"
EVAL_NAME = "eval.json"


def stats(
    data_dir: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
    fmt: TripleFormat | str = TripleFormat.NAMES,
    basis: Split | str = Split.ALL,
) -> StatsReport:
    """Dataset and relation symmetry statistics of a dataset directory.

    Args:
        data_dir: Directory holding the three split files
        threshold: Symmetry threshold
        fmt: ``names`` or ``ids``
        basis: Split the ratios are computed over

    Returns:
        The report

    Raises:
        FileNotFoundError: If a split file is missing
        DataFormatError: On a malformed file
    """
    return dataset_stats(load_dataset(data_dir, fmt), threshold, basis)


def complete(
    data_dir: str | Path,
    out_dir: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
    scope: CompletionScope | str = CompletionScope.ALL_SPLITS,
    fmt: TripleFormat | str = TripleFormat.NAMES,
    leakage_guard: bool = True,
) -> Completion:
    """Write the symmetric completion of a dataset in the ``names`` layout.

    Relations are classified over the union of the splits.

    Args:
        data_dir: The source dataset directory
        out_dir: Where ``train.txt``, ``valid.txt`` and ``test.txt`` go
        threshold: Symmetry threshold
        scope: ``train`` or ``all`` splits are completed
        fmt: Layout of the source dataset
        leakage_guard: Refuse reverses that live in another split

    Returns:
        The completion with per split counts
    """
    store = load_dataset(data_dir, fmt)
    symmetric = classify_symmetric(store, threshold, Split.ALL)
    completion = complete_symmetric(store, symmetric, scope, leakage_guard)
    save_store(completion.store, out_dir)
    return completion


def circle_gen(
    data_dir: str | Path,
    out_path: str | Path,
    n: int = 10_000,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    fmt: TripleFormat | str = TripleFormat.NAMES,
) -> list[Triple]:
    """Write a circle triple file for the symmetric relations of a dataset.

    Relations are classified on the train split.

    Raises:
        ConstraintError: If no relation is symmetric at the threshold
    """
    store = load_dataset(data_dir, fmt)
    symmetric = classify_symmetric(store, threshold, Split.TRAIN)
    triples = generate_circle_set(store, symmetric, n, seed)
    write_triples(out_path, triples, store)
    return triples


def train_model(
    data_dir: str | Path,
    out_dir: str | Path,
    config: TrainConfig,
    fmt: TripleFormat | str = TripleFormat.NAMES,
    command: Sequence[str] = (),
    progress: bool = False,
) -> TrainResult:
    """Train on a dataset directory and write the run's output directory.

    Writes ``checkpoint.kge``, ``history.tsv``, ``history.json`` and
    ``manifest.json`` into ``out_dir``.

    Args:
        data_dir: The dataset directory
        out_dir: The output directory, created when missing
        config: The run configuration
        fmt: Dataset layout
        command: The command line recorded in the manifest
        progress: Show a progress bar

    Returns:
        The trained parameters and history
    """
    store = load_dataset(data_dir, fmt)
    manifest = RunManifest(
        command=list(command),
        version=__version__,
        config=config.to_dict(),
        datasets=dataset_fingerprint(dataset_files(data_dir, fmt)),
        seed=config.seed,
    )
    result = train(store, config, progress=progress)
    out_dir = Path(out_dir)
    save_checkpoint(result.params, out_dir / CHECKPOINT_NAME, config.resolved_norm, config.seed, config.epochs, store)
    write_history(result.history, out_dir / HISTORY_NAME, out_dir / HISTORY_JSON_NAME)
    manifest.outputs = {
        "checkpoint": CHECKPOINT_NAME,
        "history": HISTORY_NAME,
        "symmetric_relations": [store.relations.name_of(r) for r in sorted(result.symmetric)],
    }
    manifest.finish()
    manifest.write(out_dir)
    return result


class EvalOutcome(NamedTuple):
    """Reports of one checkpoint evaluation."""

    model_name: str
    reports: dict[EvalMode, EvalReport]
    circle: CircleReport | None
    document: dict[str, Any]


def _modes(mode: str) -> tuple[EvalMode, ...]:
    if mode == "both":
        return (EvalMode.RAW, EvalMode.FILTERED)
    return (EvalMode.get_best(mode),)


def evaluate_checkpoint(
    checkpoint: str | Path,
    data_dir: str | Path,
    mode: str = "both",
    circle: str | Path | None = None,
    fmt: TripleFormat | str = TripleFormat.NAMES,
    workers: int = 1,
    norm: Norm | str | None = None,
    out_dir: str | Path | None = None,
    command: Sequence[str] = (),
    progress: bool = False,
) -> EvalOutcome:
    """Evaluate a checkpoint on a dataset's test split and optional circle file.

    ``eval.json`` is written into ``out_dir`` (the checkpoint's directory by
    default). The directory's manifest is extended, or written when missing.

    Args:
        checkpoint: The checkpoint file
        data_dir: The dataset directory it was trained on
        mode: ``raw``, ``filtered`` or ``both``
        circle: A circle triple file in the ``names`` layout
        fmt: Dataset layout
        workers: Ranking threads
        norm: Overrides the checkpoint's norm
        out_dir: Output directory
        command: The command line recorded in the manifest
        progress: Show a progress bar

    Returns:
        The reports and the written document

    Raises:
        VocabularyMismatchError: If the dataset does not match the checkpoint
    """
    if mode not in ("raw", "filtered", "both"):
        msg = f"unknown mode {mode!r} (choose from raw, filtered, both)"
        raise ConstraintError(msg)
    params, meta = load_checkpoint(checkpoint)
    store = load_dataset(data_dir, fmt)
    meta.check_store(store)
    norm = meta.norm if norm is None else Norm.get_best(norm)
    model_name = meta.model_kind.display + ("-SYM" if meta.symmetric_relations else "")

    both = evaluate_both(params, store.test, store, norm, workers, progress=progress)
    reports = {m: both[m] for m in _modes(mode)}
    circle_report = None
    if circle is not None:
        circle_report = circle_eval(params, load_probe_triples(circle, store), store, norm)

    document: dict[str, Any] = {
        "model": model_name,
        "epoch": meta.epoch,
        "norm": str(norm),
        **{str(m): report.to_dict() for m, report in reports.items()},
    }
    if circle_report is not None:
        document["circle"] = circle_report.to_dict()

    out_dir = Path(checkpoint).parent if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / EVAL_NAME).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _record_eval(out_dir, command, data_dir, fmt, checkpoint, circle)
    return EvalOutcome(model_name, reports, circle_report, document)


def _record_eval(
    out_dir: Path,
    command: Sequence[str],
    data_dir: str | Path,
    fmt: TripleFormat | str,
    checkpoint: str | Path,
    circle: str | Path | None,
) -> None:
    """Add the evaluation to the directory's single manifest."""
    files = [*dataset_files(data_dir, fmt), Path(checkpoint)]
    if circle is not None:
        files.append(Path(circle))
    evaluation = {"command": list(command), "inputs": dataset_fingerprint(files), "output": EVAL_NAME}
    if (out_dir / MANIFEST_NAME).is_file():
        existing = read_manifest(out_dir)
        manifest = RunManifest(**existing)
    else:
        manifest = RunManifest(command=list(command), version=__version__)
        manifest.datasets = dataset_fingerprint(dataset_files(data_dir, fmt))
    manifest.outputs = {**manifest.outputs, "eval": evaluation}
    manifest.finish()
    manifest.write(out_dir)


__all__ = [
    "circle_gen",
    "complete",
    "evaluate_checkpoint",
    "stats",
    "train_model",
]
