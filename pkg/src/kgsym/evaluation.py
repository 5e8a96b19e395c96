"""Link prediction ranking and the circle triple diagnostic."""

from __future__ import annotations

import logging
import math

from collections.abc import Collection
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import NamedTuple

import numpy as np

from tqdm import tqdm

from .errors import DataFormatError
from .errors import UnknownEntityError
from .errors import UnknownRelationError
from .kg_constants import DEFAULT_THRESHOLD
from .kg_constants import HITS_AT
from .kg_constants import EvalMode
from .kg_constants import Norm
from .kg_constants import Side
from .kg_constants import Split
from .kg_data.store import TripleStore
from .kg_data.symmetry import classify_symmetric
from .kg_defs import Triple
from .models.params import ModelParams
from .models.scoring import resolve_norm
from .models.scoring import score_batch
from .models.scoring import score_candidates


logger = logging.getLogger(__name__)

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"


class TripleRanks(NamedTuple):
    """Head and tail rank of one triple."""

    head_rank: int
    tail_rank: int


@dataclass(frozen=True)
class RankMetrics:
    """MR, MRR and Hits@K over a list of ranks."""

    count: int
    mr: float
    mrr: float
    hits: dict[int, float]

    @classmethod
    def from_ranks(cls, ranks: Sequence[int] | np.ndarray) -> RankMetrics:
        """Aggregate ranks, all metrics are 0 for an empty list.

        The result does not depend on the order of ``ranks``, bit for bit.
        """
        ranks = np.sort(np.asarray(ranks, dtype=np.float64).ravel())
        if ranks.size == 0:
            return cls(0, 0.0, 0.0, dict.fromkeys(HITS_AT, 0.0))
        count = int(ranks.size)
        return cls(
            count=count,
            mr=math.fsum(ranks.tolist()) / count,
            mrr=math.fsum((1.0 / ranks).tolist()) / count,
            hits={k: int((ranks <= k).sum()) / count for k in HITS_AT},
        )

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation."""
        return {
            "count": self.count,
            "mr": self.mr,
            "mrr": self.mrr,
            "hits": {str(k): value for k, value in self.hits.items()},
        }


@dataclass(frozen=True)
class EvalReport:
    """Link prediction results for one ranking mode."""

    mode: EvalMode
    #: Pooled head and tail ranks of every triple
    metrics: RankMetrics
    per_relation: dict[int, RankMetrics] = field(default_factory=dict)
    #: ``symmetric`` and ``asymmetric`` relations
    per_category: dict[str, RankMetrics] = field(default_factory=dict)
    relation_names: dict[int, str] = field(default_factory=dict)

    @property
    def count(self) -> int:
        """Evaluated triples, each contributes two ranks."""
        return self.metrics.count // 2

    @property
    def mr(self) -> float:
        """Mean rank."""
        return self.metrics.mr

    @property
    def mrr(self) -> float:
        """Mean reciprocal rank."""
        return self.metrics.mrr

    @property
    def hits(self) -> dict[int, float]:
        """Hits@K."""
        return self.metrics.hits

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation."""
        return {
            "mode": str(self.mode),
            "triples": self.count,
            **self.metrics.to_dict(),
            "per_category": {name: metrics.to_dict() for name, metrics in self.per_category.items()},
            "per_relation": {
                self.relation_names.get(relation, str(relation)): metrics.to_dict()
                for relation, metrics in sorted(self.per_relation.items())
            },
        }


@dataclass(frozen=True)
class CircleSummary:
    """Scores and tail ranks of a group of circle triples."""

    mean_score: float
    metrics: RankMetrics

    @property
    def fraction_ranked_1(self) -> float:
        """Share of circle triples whose own entity ranks first."""
        return self.metrics.hits[1]

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation."""
        return {"mean_score": self.mean_score, "fraction_ranked_1": self.fraction_ranked_1, **self.metrics.to_dict()}


@dataclass(frozen=True)
class CircleReport:
    """The circle triple diagnostic."""

    overall: CircleSummary
    per_relation: dict[int, CircleSummary] = field(default_factory=dict)
    relation_names: dict[int, str] = field(default_factory=dict)

    @property
    def mean_score(self) -> float:
        """Mean score of all circle triples."""
        return self.overall.mean_score

    @property
    def mr(self) -> float:
        """Mean tail rank."""
        return self.overall.metrics.mr

    @property
    def fraction_ranked_1(self) -> float:
        """Share of circle triples ranked first."""
        return self.overall.fraction_ranked_1

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation."""
        return {
            **self.overall.to_dict(),
            "per_relation": {
                self.relation_names.get(relation, str(relation)): summary.to_dict()
                for relation, summary in sorted(self.per_relation.items())
            },
        }


def _mean(values: np.ndarray) -> float:
    return math.fsum(np.sort(values).tolist()) / values.size


def rank_of(scores: np.ndarray, true_index: int, exclude: Collection[int] = ()) -> int:
    """Rank of ``scores[true_index]`` among the candidates, lower scores first.

    Candidates in ``exclude`` are dropped, the true index never is. Ties
    count half: ``1 + less + round_half_up((tied - 1) / 2)`` where ``tied``
    includes the true candidate.
    """
    target = scores[true_index]
    if exclude:
        keep = np.ones(scores.shape[0], dtype=bool)
        keep[np.fromiter(exclude, dtype=np.int64)] = False
        keep[true_index] = True
        scores = scores[keep]
    less = int(np.count_nonzero(scores < target))
    tied = int(np.count_nonzero(scores == target))
    return 1 + less + tied // 2


def _ranks(params: ModelParams, triple: Triple, store: TripleStore, norm: Norm) -> tuple[int, int, int, int]:
    """Raw head, raw tail, filtered head and filtered tail rank."""
    head, relation, tail = triple
    tail_scores = score_candidates(params, head, relation, Side.TAIL, norm)
    head_scores = score_candidates(params, tail, relation, Side.HEAD, norm)
    return (
        rank_of(head_scores, head),
        rank_of(tail_scores, tail),
        rank_of(head_scores, head, store.known_heads(relation, tail)),
        rank_of(tail_scores, tail, store.known_tails(head, relation)),
    )


def _check_triple(params: ModelParams, triple: Triple) -> None:
    for entity in (triple.head, triple.tail):
        if not 0 <= entity < params.num_entities:
            msg = f"unknown entity id {entity} (|E|={params.num_entities})"
            raise UnknownEntityError(msg)
    if not 0 <= triple.relation < params.num_relations:
        msg = f"unknown relation id {triple.relation} (|R|={params.num_relations})"
        raise UnknownRelationError(msg)


def rank_triple(
    params: ModelParams,
    triple: Triple | tuple[int, int, int],
    store: TripleStore,
    mode: EvalMode | str = EvalMode.FILTERED,
    norm: Norm | str | None = None,
) -> TripleRanks:
    """Rank a triple's head and tail among all entities.

    Args:
        params: The model
        triple: The true triple
        store: Supplies the known triples of every split for filtering
        mode: ``raw`` or ``filtered``
        norm: L1 or L2, the model default when omitted

    Returns:
        The head rank and the tail rank, both at least 1
    """
    triple = Triple(*triple)
    _check_triple(params, triple)
    raw_head, raw_tail, filtered_head, filtered_tail = _ranks(params, triple, store, resolve_norm(params, norm))
    if EvalMode.get_best(mode) is EvalMode.RAW:
        return TripleRanks(raw_head, raw_tail)
    return TripleRanks(filtered_head, filtered_tail)


def _rank_shard(params: ModelParams, triples: Sequence[Triple], store: TripleStore, norm: Norm) -> np.ndarray:
    return np.asarray([_ranks(params, triple, store, norm) for triple in triples], dtype=np.int64).reshape(-1, 4)


def _all_ranks(
    params: ModelParams,
    triples: Sequence[Triple],
    store: TripleStore,
    norm: Norm,
    workers: int,
    progress: bool,
) -> np.ndarray:
    """``(n, 4)`` raw head, raw tail, filtered head, filtered tail ranks in input order."""
    sections = np.array_split(np.arange(len(triples)), max(1, workers) * 4)
    shards = [[triples[i] for i in part.tolist()] for part in sections if part.size]
    bar = tqdm(total=len(shards), unit="shard", disable=not progress, desc="Link prediction evaluation")
    with bar:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                parts = []
                for part in executor.map(lambda shard: _rank_shard(params, shard, store, norm), shards):
                    parts.append(part)
                    bar.update()
        else:
            parts = []
            for shard in shards:
                parts.append(_rank_shard(params, shard, store, norm))
                bar.update()
    return np.concatenate(parts)


def _report(
    mode: EvalMode,
    triples: Sequence[Triple],
    heads: np.ndarray,
    tails: np.ndarray,
    symmetric: frozenset[int],
    store: TripleStore,
) -> EvalReport:
    relations = np.asarray([triple.relation for triple in triples], dtype=np.int64)
    pooled_relations = np.concatenate([relations, relations])
    pooled = np.concatenate([heads, tails])
    per_relation = {
        int(relation): RankMetrics.from_ranks(pooled[pooled_relations == relation])
        for relation in np.unique(relations)
    }
    is_symmetric = np.isin(pooled_relations, list(symmetric))
    per_category = {
        SYMMETRIC: RankMetrics.from_ranks(pooled[is_symmetric]),
        ASYMMETRIC: RankMetrics.from_ranks(pooled[~is_symmetric]),
    }
    return EvalReport(
        mode=mode,
        metrics=RankMetrics.from_ranks(pooled),
        per_relation=per_relation,
        per_category=per_category,
        relation_names={relation: store.relations.name_of(relation) for relation in per_relation},
    )


def evaluate_both(
    params: ModelParams,
    test_split: Sequence[Triple],
    store: TripleStore,
    norm: Norm | str | None = None,
    workers: int = 1,
    symmetric: Collection[int] | None = None,
    progress: bool = False,
) -> dict[EvalMode, EvalReport]:
    """Raw and filtered link prediction in one pass.

    Args:
        params: The model
        test_split: The triples to rank
        store: Supplies names and the known triples for filtering
        norm: L1 or L2, the model default when omitted
        workers: Threads ranking shards of the test split
        symmetric: Relations of the ``symmetric`` category; the model's pairs,
            or when it has none the relations classified on the train split
        progress: Show a progress bar

    Returns:
        One report per mode

    Raises:
        DataFormatError: If the test split is empty
    """
    triples = [Triple(*triple) for triple in test_split]
    if not triples:
        msg = "cannot evaluate an empty test split"
        raise DataFormatError(msg)
    for triple in triples:
        _check_triple(params, triple)
    if symmetric is None:
        symmetric = params.symmetric_relations or classify_symmetric(store, DEFAULT_THRESHOLD, Split.TRAIN)
    symmetric = frozenset(int(relation) for relation in symmetric)
    ranks = _all_ranks(params, triples, store, resolve_norm(params, norm), workers, progress)
    reports = {
        EvalMode.RAW: _report(EvalMode.RAW, triples, ranks[:, 0], ranks[:, 1], symmetric, store),
        EvalMode.FILTERED: _report(EvalMode.FILTERED, triples, ranks[:, 2], ranks[:, 3], symmetric, store),
    }
    for mode, report in reports.items():
        logger.info(
            "%s: %d triples, MR %.3f, MRR %.4f, Hits@10 %.4f",
            mode,
            report.count,
            report.mr,
            report.mrr,
            report.hits[10],
        )
    return reports


def link_prediction(
    params: ModelParams,
    test_split: Sequence[Triple],
    store: TripleStore,
    mode: EvalMode | str = EvalMode.FILTERED,
    norm: Norm | str | None = None,
    workers: int = 1,
    symmetric: Collection[int] | None = None,
) -> EvalReport:
    """Pooled head and tail ranking metrics of a test split in one mode.

    See ``evaluate_both`` for the arguments.
    """
    return evaluate_both(params, test_split, store, norm, workers, symmetric)[EvalMode.get_best(mode)]


def circle_eval(
    params: ModelParams,
    circle_set: Sequence[Triple],
    store: TripleStore,
    norm: Norm | str | None = None,
) -> CircleReport:
    """Score reflexive triples and rank each entity as its own tail.

    Ranks are raw: every entity is a candidate.

    Args:
        params: The model
        circle_set: Triples ``(e, r, e)``
        store: Supplies relation names
        norm: L1 or L2, the model default when omitted

    Returns:
        The report

    Raises:
        DataFormatError: On an empty circle set
        UnknownEntityError: For an entity outside the model
        UnknownRelationError: For a relation outside the model
    """
    triples = [Triple(*triple) for triple in circle_set]
    if not triples:
        msg = "cannot evaluate an empty circle set"
        raise DataFormatError(msg)
    for triple in triples:
        _check_triple(params, triple)
    norm = resolve_norm(params, norm)
    scores = score_batch(params, np.asarray(triples, dtype=np.int64), norm).values.astype(np.float64)
    ranks = np.asarray(
        [rank_of(score_candidates(params, head, relation, Side.TAIL, norm), tail) for head, relation, tail in triples],
        dtype=np.int64,
    )
    relations = np.asarray([triple.relation for triple in triples], dtype=np.int64)
    per_relation = {
        int(relation): CircleSummary(
            _mean(scores[relations == relation]),
            RankMetrics.from_ranks(ranks[relations == relation]),
        )
        for relation in np.unique(relations)
    }
    report = CircleReport(
        overall=CircleSummary(_mean(scores), RankMetrics.from_ranks(ranks)),
        per_relation=per_relation,
        relation_names={relation: store.relations.name_of(relation) for relation in per_relation},
    )
    logger.info(
        "circle test: %d triples, mean score %.4f, %.3f ranked first",
        len(triples),
        report.mean_score,
        report.fraction_ranked_1,
    )
    return report
