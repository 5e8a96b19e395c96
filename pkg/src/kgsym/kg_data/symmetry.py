"""Symmetry ratios, symmetric relation classification and completion."""

from __future__ import annotations

import logging

from collections import Counter
from collections.abc import Collection

from ..errors import ConstraintError
from ..kg_constants import DEFAULT_THRESHOLD
from ..kg_constants import CompletionScope
from ..kg_constants import Split
from ..kg_defs import Completion
from ..kg_defs import RelationMeta
from ..kg_defs import SplitStats
from ..kg_defs import StatsReport
from ..kg_defs import Triple
from .store import TripleStore


logger = logging.getLogger(__name__)


def _check_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if not 0.0 <= threshold <= 1.0:
        msg = f"threshold must lie in [0, 1], got {threshold}"
        raise ConstraintError(msg)
    return threshold


def _counts(store: TripleStore, split: Split) -> tuple[Counter[int], Counter[int]]:
    """Per relation totals and reversed-present counts over a split's set."""
    index = store.index(split)
    totals: Counter[int] = Counter()
    symmetric: Counter[int] = Counter()
    for triple in index:
        totals[triple.relation] += 1
        # a reflexive triple is its own reverse
        if triple.reverse() in index:
            symmetric[triple.relation] += 1
    return totals, symmetric


def _meta(store: TripleStore, relation: int, total: int, symmetric: int, threshold: float) -> RelationMeta:
    ratio = symmetric / total if total else 0.0
    return RelationMeta(
        relation=relation,
        name=store.relations.name_of(relation),
        total=total,
        symmetric_count=symmetric,
        ratio=ratio,
        is_symmetric=ratio >= threshold,
    )


def symmetry_ratio(store: TripleStore, relation: int, split: Split | str = Split.ALL) -> float:
    """The fraction of a relation's triples whose reverse is in the same split.

    Args:
        store: The store
        relation: The relation id
        split: A split, ``ALL`` uses the union of the three

    Returns:
        The ratio in [0, 1], 0 for a relation without triples

    Raises:
        UnknownRelationError: For an unknown relation id
    """
    relation = store.check_relation(relation)
    index = store.index(split)
    total = 0
    symmetric = 0
    for triple in index:
        if triple.relation == relation:
            total += 1
            symmetric += triple.reverse() in index
    return symmetric / total if total else 0.0


def relation_meta(
    store: TripleStore,
    relation: int,
    split: Split | str = Split.ALL,
    threshold: float = DEFAULT_THRESHOLD,
) -> RelationMeta:
    """Symmetry statistics of one relation."""
    relation = store.check_relation(relation)
    threshold = _check_threshold(threshold)
    index = store.index(split)
    rows = [triple for triple in index if triple.relation == relation]
    symmetric = sum(triple.reverse() in index for triple in rows)
    return _meta(store, relation, len(rows), symmetric, threshold)


def relation_table(
    store: TripleStore,
    threshold: float = DEFAULT_THRESHOLD,
    split: Split | str = Split.ALL,
) -> tuple[RelationMeta, ...]:
    """Statistics of every relation, sorted by ratio descending then id."""
    threshold = _check_threshold(threshold)
    totals, symmetric = _counts(store, Split.get_best(split))
    rows = [
        _meta(store, relation, totals[relation], symmetric[relation], threshold)
        for relation in range(store.num_relations)
    ]
    return tuple(sorted(rows, key=lambda meta: (-meta.ratio, meta.relation)))


def classify_symmetric(
    store: TripleStore,
    threshold: float = DEFAULT_THRESHOLD,
    split: Split | str = Split.ALL,
) -> dict[int, RelationMeta]:
    """Find the relations whose symmetry ratio reaches the threshold.

    Args:
        store: The store
        threshold: Minimum ratio, a relation exactly at it is symmetric
        split: The split the ratios are computed over, the union by default

    Returns:
        The symmetric relation ids mapped to their statistics
    """
    table = relation_table(store, threshold, split)
    found = {meta.relation: meta for meta in table if meta.is_symmetric}
    logger.info(
        "classified %d of %d relations symmetric at threshold %s over %s",
        len(found),
        store.num_relations,
        threshold,
        Split.get_best(split),
    )
    return found


def complete_symmetric(
    store: TripleStore,
    symmetric_relations: Collection[int],
    scope: CompletionScope | str = CompletionScope.ALL_SPLITS,
    leakage_guard: bool = True,
    quiet: bool = False,
) -> Completion:
    """Append the missing reverse of every triple of a symmetric relation.

    Each split in scope is completed against itself. With the leakage guard a
    reverse is not added to a split when it already lives in another split.

    Args:
        store: The store
        symmetric_relations: Relation ids to complete
        scope: ``train`` or ``all`` splits
        leakage_guard: Refuse reverses present in another split
        quiet: Report skipped reverses at INFO instead of WARNING

    Returns:
        The completed store with per split added and skipped counts
    """
    relations = frozenset(store.check_relation(relation) for relation in symmetric_relations)
    scope = CompletionScope.get_best(scope)
    in_scope = (Split.TRAIN,) if scope is CompletionScope.TRAIN_ONLY else Split.concrete()

    completed: dict[Split, list[Triple]] = {}
    added = dict.fromkeys(Split.concrete(), 0)
    skipped = dict.fromkeys(Split.concrete(), 0)
    for split in in_scope:
        present = set(store.index(split))
        others = frozenset().union(*(store.index(other) for other in Split.concrete() if other is not split))
        out = list(store.split(split))
        for triple in store.split(split):
            if triple.relation not in relations:
                continue
            reverse = triple.reverse()
            if reverse in present:
                continue
            if leakage_guard and reverse in others:
                skipped[split] += 1
                continue
            present.add(reverse)
            out.append(reverse)
            added[split] += 1
        completed[split] = out
        if skipped[split]:
            logger.log(
                logging.INFO if quiet else logging.WARNING,
                "%d reverses not added to %s, they already live in another split",
                skipped[split],
                split,
            )

    result = store.with_splits(
        train=completed.get(Split.TRAIN),
        valid=completed.get(Split.VALID),
        test=completed.get(Split.TEST),
    )
    logger.info("completion added %s", {str(split): count for split, count in added.items()})
    return Completion(result, added, skipped)


def _symmetric_triples(store: TripleStore, split: Split) -> int:
    index = store.index(split)
    return sum(triple.reverse() in index for triple in store.split(split))


def dataset_stats(
    store: TripleStore,
    threshold: float = DEFAULT_THRESHOLD,
    basis: Split | str = Split.ALL,
) -> StatsReport:
    """Dataset statistics before and after symmetric completion.

    Completion counts are given with and without the leakage guard, the
    percentages follow SYM/ALL and (SYM + 2 added)/(ALL + added).

    Args:
        store: The store
        threshold: Symmetry threshold
        basis: The split symmetry ratios are computed over

    Returns:
        The report
    """
    basis = Split.get_best(basis)
    table = relation_table(store, threshold, basis)
    symmetric = [meta.relation for meta in table if meta.is_symmetric]
    guarded = complete_symmetric(store, symmetric, CompletionScope.ALL_SPLITS, leakage_guard=True, quiet=True)
    unguarded = complete_symmetric(store, symmetric, CompletionScope.ALL_SPLITS, leakage_guard=False, quiet=True)
    splits = {
        split: SplitStats(
            total=len(store.split(split)),
            symmetric=_symmetric_triples(store, split),
            added=guarded.added[split],
            skipped=guarded.skipped[split],
            added_unguarded=unguarded.added[split],
        )
        for split in Split.concrete()
    }
    return StatsReport(
        entity_count=store.num_entities,
        relation_count=store.num_relations,
        threshold=float(threshold),
        basis=basis,
        splits=splits,
        relations=table,
    )
