"""Negative sampling and minibatch SGD over the margin ranking loss."""

from __future__ import annotations

import json
import logging
import time

from collections.abc import Callable
from concurrent.futures import Executor
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import NamedTuple

import numpy as np

from tqdm import tqdm

from .config import TrainConfig
from .errors import NonFiniteError
from .kg_constants import LossReduction
from .kg_constants import Split
from .kg_data.store import TripleStore
from .kg_data.symmetry import classify_symmetric
from .kg_defs import Triple
from .models.gradients import BatchGradients
from .models.gradients import apply_gradients
from .models.gradients import batch_gradients
from .models.params import ModelParams
from .models.params import apply_constraints
from .models.params import init_params
from .models.params import mean_entity_norm
from .models.params import relation_norms


logger = logging.getLogger(__name__)

#: Redraws of a corruption that collides with a training triple
MAX_ATTEMPTS = 100


def sample_negatives(
    store: TripleStore,
    positives: np.ndarray,
    rng: np.random.Generator,
    max_attempts: int = MAX_ATTEMPTS,
) -> np.ndarray:
    """Corrupt every row of ``positives`` by uniform replacement.

    Each row has its head or its tail (probability 1/2 each) replaced by a
    uniformly drawn entity. Rows whose corruption is a training triple are
    redrawn, keeping the chosen side, up to ``max_attempts`` draws in total;
    rows still colliding after that keep their last candidate.

    Args:
        store: The store, corruptions are filtered against its train split
        positives: ``(B, 3)`` ``head, relation, tail`` ids
        rng: The generator, advanced deterministically
        max_attempts: Draws per row before giving up

    Returns:
        ``(B, 3)`` corrupted triples
    """
    positives = np.asarray(positives, dtype=np.int64).reshape(-1, 3)
    count = len(positives)
    negatives = positives.copy()
    if count == 0:
        return negatives
    column = np.where(rng.random(count) < 0.5, 0, 2)
    pending = np.arange(count)
    for _ in range(max_attempts):
        negatives[pending, column[pending]] = rng.integers(0, store.num_entities, size=len(pending))
        pending = pending[store.contains_rows(negatives[pending], Split.TRAIN)]
        if pending.size == 0:
            break
    else:
        logger.warning(
            "%d corruptions still collide with training triples after %d attempts, keeping them",
            pending.size,
            max_attempts,
        )
    return negatives


def sample_negative(
    store: TripleStore,
    pos: Triple | tuple[int, int, int],
    rng: np.random.Generator,
) -> Triple:
    """Corrupt one triple, see ``sample_negatives``."""
    row = sample_negatives(store, np.asarray([pos]), rng)[0]
    return Triple(int(row[0]), int(row[1]), int(row[2]))


class EpochStats(NamedTuple):
    """Loss statistics of one epoch.

    Args:
        mean_loss: Mean hinge loss per (positive, negative) pair
        samples: Pairs seen
        active: Pairs with a positive hinge
    """

    mean_loss: float
    samples: int
    active: int


def _check_finite(params: ModelParams, grads: BatchGradients, detail: str) -> None:
    if not np.all(np.isfinite(grads.losses)):
        logger.critical("non-finite loss (%s)", detail)
        raise NonFiniteError("loss", detail)
    blocks = params.blocks()
    for name in blocks:
        touched = grads.touched(name)
        if touched.size and not np.all(np.isfinite(blocks[name][touched])):
            logger.critical("non-finite values in %s (%s)", name, detail)
            raise NonFiniteError(name, detail)


def _gradients(
    params: ModelParams,
    positives: np.ndarray,
    negatives: np.ndarray,
    config: TrainConfig,
    executor: Executor | None,
) -> BatchGradients:
    if executor is None or config.workers < 2 or len(positives) < 2:
        return batch_gradients(params, positives, negatives, config.margin, config.resolved_norm)
    shards = np.array_split(np.arange(len(positives)), min(config.workers, len(positives)))
    parts = executor.map(
        lambda idx: batch_gradients(params, positives[idx], negatives[idx], config.margin, config.resolved_norm),
        shards,
    )
    return BatchGradients.merge(list(parts))


def train_epoch(
    params: ModelParams,
    store: TripleStore,
    config: TrainConfig,
    rng: np.random.Generator,
    learning_rate: float | None = None,
    executor: Executor | None = None,
    epoch: int = 0,
) -> EpochStats:
    """Run one pass over the training split.

    The train triples are shuffled with ``rng`` and cut into minibatches.
    Every positive is repeated ``negatives_per_positive`` times against fresh
    corruptions. The summed loss gradient of a batch is applied with plain SGD,
    divided by ``negatives_per_positive`` under the ``mean`` reduction so each
    positive counts once. The constraints are enforced on the touched rows once
    per batch.

    Args:
        params: The model, updated in place
        store: The dataset
        config: The run configuration
        rng: The generator for shuffling and sampling
        learning_rate: Overrides ``config.learning_rate``; 0 computes the
            loss without touching the parameters
        executor: Thread pool for the parallel mode
        epoch: Epoch number used in diagnostics

    Returns:
        The epoch's loss statistics

    Raises:
        NonFiniteError: On NaN or Inf in the loss or a parameter block
    """
    lr = config.learning_rate if learning_rate is None else float(learning_rate)
    if config.reduction is LossReduction.MEAN:
        lr /= config.negatives_per_positive
    train = store.as_array(Split.TRAIN)
    order = rng.permutation(len(train))
    total = 0.0
    samples = 0
    active = 0
    for batch_no, start in enumerate(range(0, len(order), config.batch_size)):
        positives = np.repeat(train[order[start : start + config.batch_size]], config.negatives_per_positive, axis=0)
        negatives = sample_negatives(store, positives, rng)
        grads = _gradients(params, positives, negatives, config, executor)
        detail = f"epoch {epoch}, batch {batch_no}"
        if lr > 0 and grads.rows:
            apply_gradients(params, grads, lr)
            apply_constraints(params, entities=grads.touched("entity_emb"), slots=grads.touched("rel_hyper"))
        _check_finite(params, grads, detail)
        total += grads.loss
        samples += len(positives)
        active += grads.active
        logger.debug("%s: loss %.6f, %d of %d active", detail, grads.loss, grads.active, len(positives))
    return EpochStats(total / samples if samples else 0.0, samples, active)


@dataclass
class EpochRecord:
    """One row of the training history."""

    epoch: int
    mean_loss: float
    mean_entity_norm: float
    #: Relation id to its norms, see ``relation_norms``
    norms: dict[int, dict[str, float]]
    seconds: float
    #: Filtered validation metrics when the validation hook ran this epoch
    valid: dict[str, float] | None = None


@dataclass
class TrainHistory:
    """Per epoch losses and the relation norm trace."""

    #: Traced relation ids mapped to their names
    relations: dict[int, str]
    #: Relations held as pairs
    pairs: frozenset[int] = frozenset()
    records: list[EpochRecord] = field(default_factory=list)
    valid_every: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> EpochRecord | None:
        """The last completed epoch."""
        return self.records[-1] if self.records else None

    def columns(self) -> list[str]:
        """TSV column names."""
        names = ["epoch", "mean_loss", "mean_entity_norm"]
        for relation, name in self.relations.items():
            if relation in self.pairs:
                names += [f"norm+[{name}]", f"norm-[{name}]", f"gap[{name}]"]
            else:
                names.append(f"norm[{name}]")
        if self.valid_every:
            names += ["valid_mrr", "valid_hits@10"]
        return names


def _fmt(value: float) -> str:
    return f"{value:.8g}"


def history_to_tsv(history: TrainHistory) -> str:
    """The history as tab separated text, one line per epoch.

    Wall-clock times are left out so reruns give identical bytes.
    """
    lines = ["\t".join(history.columns())]
    for record in history.records:
        fields = [str(record.epoch), _fmt(record.mean_loss), _fmt(record.mean_entity_norm)]
        for relation in history.relations:
            norms = record.norms[relation]
            if relation in history.pairs:
                fields += [_fmt(norms["plus"]), _fmt(norms["minus"]), _fmt(norms["gap"])]
            else:
                fields.append(_fmt(norms["norm"]))
        if history.valid_every:
            if record.valid is None:
                fields += ["", ""]
            else:
                fields += [_fmt(record.valid["mrr"]), _fmt(record.valid["hits@10"])]
        lines.append("\t".join(fields))
    return "\n".join(lines) + "\n"


def history_to_json(history: TrainHistory) -> dict[str, Any]:
    """The history as a JSON ready dict, wall-clock included."""
    return {
        "relations": {str(relation): name for relation, name in history.relations.items()},
        "pairs": sorted(history.pairs),
        "epochs": [
            {
                "epoch": record.epoch,
                "mean_loss": record.mean_loss,
                "mean_entity_norm": record.mean_entity_norm,
                "norms": {str(relation): norms for relation, norms in record.norms.items()},
                "seconds": record.seconds,
                "valid": record.valid,
            }
            for record in history.records
        ],
    }


def write_history(history: TrainHistory, tsv_path: str | Path, json_path: str | Path | None = None) -> None:
    """Write the TSV and optionally the JSON form."""
    tsv_path = Path(tsv_path)
    tsv_path.parent.mkdir(parents=True, exist_ok=True)
    tsv_path.write_text(history_to_tsv(history), encoding="utf-8", newline="\n")
    if json_path is not None:
        Path(json_path).write_text(json.dumps(history_to_json(history), indent=2) + "\n", encoding="utf-8")


class TrainResult(NamedTuple):
    """The trained model with its history."""

    params: ModelParams
    history: TrainHistory
    #: Relations classified symmetric on the train split
    symmetric: frozenset[int]


def _validate(params: ModelParams, store: TripleStore, config: TrainConfig) -> dict[str, float]:
    from .evaluation import link_prediction

    report = link_prediction(params, store.valid, store, "filtered", norm=config.resolved_norm)
    return {"mrr": report.metrics.mrr, "hits@10": report.metrics.hits[10]}


def train(
    store: TripleStore,
    config: TrainConfig,
    progress: bool = False,
    on_epoch: Callable[[EpochRecord, ModelParams], None] | None = None,
) -> TrainResult:
    """Train a model from scratch.

    Relations are classified symmetric on the train split with
    ``config.threshold``; with ``sym_enabled`` they get plus/minus pairs. Their
    norms are traced every epoch either way.

    Args:
        store: The dataset
        config: The run configuration
        progress: Show a progress bar over epochs
        on_epoch: Called after every epoch with the record and the parameters

    Returns:
        The parameters, the history and the symmetric relation ids

    Raises:
        NonFiniteError: If training diverges
    """
    symmetric = frozenset(classify_symmetric(store, config.threshold, Split.TRAIN))
    pairs = symmetric if config.sym_enabled else frozenset()
    params = init_params(
        store.num_entities,
        store.num_relations,
        pairs,
        config.model_kind,
        config.dim,
        config.seed,
        dtype=np.float32,
    )
    traced = {relation: store.relations.name_of(relation) for relation in sorted(symmetric)}
    history = TrainHistory(traced, pairs, valid_every=config.valid_every)
    rng = np.random.default_rng((config.seed, 1))

    parallel = config.workers > 1 and not config.deterministic
    if config.workers > 1 and config.deterministic:
        logger.info("deterministic mode, ignoring workers=%d", config.workers)
    executor = ThreadPoolExecutor(max_workers=config.workers) if parallel else None
    logger.info("training %s on %r: %s", config.model_name, store, config.to_dict())
    try:
        epochs = tqdm(
            range(1, config.epochs + 1),
            unit="epoch",
            disable=not progress,
            desc=config.model_name,
        )
        for epoch in epochs:
            started = time.perf_counter()
            stats = train_epoch(params, store, config, rng, executor=executor, epoch=epoch)
            record = EpochRecord(
                epoch=epoch,
                mean_loss=stats.mean_loss,
                mean_entity_norm=mean_entity_norm(params),
                norms=relation_norms(params, traced),
                seconds=time.perf_counter() - started,
            )
            if config.valid_every and epoch % config.valid_every == 0 and store.valid:
                record.valid = _validate(params, store, config)
            history.records.append(record)
            logger.info(
                "epoch %d: mean loss %.6f, %d of %d active", epoch, stats.mean_loss, stats.active, stats.samples
            )
            if on_epoch is not None:
                on_epoch(record, params)
    finally:
        if executor is not None:
            executor.shutdown()
    return TrainResult(params, history, symmetric)
