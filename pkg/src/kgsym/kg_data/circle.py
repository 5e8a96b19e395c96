"""Reflexive probe triples for the degeneration test."""

from __future__ import annotations

from collections.abc import Collection

import numpy as np

from ..errors import ConstraintError
from ..kg_defs import Triple
from .store import TripleStore


def generate_circle_set(
    store: TripleStore,
    symmetric_relations: Collection[int],
    n: int,
    seed: int,
) -> list[Triple]:
    """Draw ``n`` triples ``(e, r, e)`` with replacement.

    Entities are uniform over the store, relations uniform over the given
    symmetric relations; the result depends only on the arguments.

    Args:
        store: The store providing the entity count
        symmetric_relations: Relation ids to draw from
        n: How many triples
        seed: Generator seed

    Returns:
        The triples in draw order

    Raises:
        ConstraintError: On an empty relation set, ``n < 1`` or an empty store
    """
    relations = sorted(store.check_relation(relation) for relation in set(symmetric_relations))
    if not relations:
        msg = "circle set needs at least one symmetric relation"
        raise ConstraintError(msg)
    if n < 1:
        msg = f"circle set size must be at least 1, got {n}"
        raise ConstraintError(msg)
    if store.num_entities == 0:
        msg = "circle set needs at least one entity"
        raise ConstraintError(msg)
    rng = np.random.default_rng(seed)
    entities = rng.integers(0, store.num_entities, size=n)
    picks = rng.integers(0, len(relations), size=n)
    return [Triple(int(e), relations[int(p)], int(e)) for e, p in zip(entities, picks)]
