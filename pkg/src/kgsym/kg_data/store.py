"""The in-memory triple store."""

from __future__ import annotations

import functools

from collections import defaultdict
from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Sequence

import numpy as np

from ..errors import DataFormatError
from ..errors import UnknownEntityError
from ..errors import UnknownRelationError
from ..kg_constants import Split
from ..kg_defs import Triple


class Vocab:
    """A bidirectional name to id map, ids are dense and start at 0."""

    def __init__(self, names: Iterable[str] = ()) -> None:
        """Initialize the vocabulary.

        Args:
            names: Names to register, in id order
        """
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        self._frozen = False
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        """Register a name, returning its id (existing or new)."""
        try:
            return self._ids[name]
        except KeyError:
            pass
        if self._frozen:
            msg = f"vocabulary is frozen, cannot add {name!r}"
            raise DataFormatError(msg)
        idx = self._ids[name] = len(self._names)
        self._names.append(name)
        return idx

    def freeze(self) -> Vocab:
        """Reject further additions."""
        self._frozen = True
        return self

    def id_of(self, name: str) -> int:
        """The id of a name.

        Raises:
            KeyError: If the name is unknown
        """
        return self._ids[name]

    def name_of(self, idx: int) -> str:
        """The name behind an id."""
        return self._names[idx]

    @property
    def names(self) -> tuple[str, ...]:
        """All names in id order."""
        return tuple(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and self._names == other._names

    def __hash__(self) -> int:
        return hash(tuple(self._names))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(<{len(self)} names>)"


class TripleStore:
    """Three splits of integer triples over shared vocabularies.

    The store is immutable after construction, operations that change the
    data return a new store.
    """

    def __init__(
        self,
        entities: Vocab,
        relations: Vocab,
        train: Sequence[Triple] = (),
        valid: Sequence[Triple] = (),
        test: Sequence[Triple] = (),
    ) -> None:
        """Initialize and validate the store.

        Args:
            entities: The entity vocabulary
            relations: The relation vocabulary
            train: Training triples
            valid: Validation triples
            test: Test triples

        Raises:
            DataFormatError: On an out of range id or a duplicate within a split
        """
        self._entities = entities.freeze()
        self._relations = relations.freeze()
        self._splits: dict[Split, tuple[Triple, ...]] = {}
        self._index: dict[Split, frozenset[Triple]] = {}
        for split, triples in zip(Split.concrete(), (train, valid, test)):
            ordered = tuple(Triple(*triple) for triple in triples)
            for triple in ordered:
                self._check_ids(triple)
            index = frozenset(ordered)
            if len(index) != len(ordered):
                seen: set[Triple] = set()
                for pos, triple in enumerate(ordered):
                    if triple in seen:
                        msg = f"duplicate triple {tuple(triple)} at position {pos} of the {split} split"
                        raise DataFormatError(msg)
                    seen.add(triple)
            self._splits[split] = ordered
            self._index[split] = index
        self._index[Split.ALL] = self._index[Split.TRAIN] | self._index[Split.VALID] | self._index[Split.TEST]

    def _check_ids(self, triple: Triple) -> None:
        if not 0 <= triple.head < len(self._entities) or not 0 <= triple.tail < len(self._entities):
            msg = f"entity id out of range in {tuple(triple)} (|E|={len(self._entities)})"
            raise DataFormatError(msg)
        if not 0 <= triple.relation < len(self._relations):
            msg = f"relation id out of range in {tuple(triple)} (|R|={len(self._relations)})"
            raise DataFormatError(msg)

    @classmethod
    def from_names(
        cls,
        train: Iterable[tuple[str, str, str]] = (),
        valid: Iterable[tuple[str, str, str]] = (),
        test: Iterable[tuple[str, str, str]] = (),
    ) -> TripleStore:
        """Build a store from name triples, ids follow first appearance.

        Args:
            train: ``(head, relation, tail)`` names for the train split
            valid: Names for the valid split
            test: Names for the test split

        Returns:
            The new store
        """
        entities = Vocab()
        relations = Vocab()
        encoded: list[list[Triple]] = []
        for rows in (train, valid, test):
            split: list[Triple] = []
            for head, relation, tail in rows:
                h = entities.add(head)
                t = entities.add(tail)
                split.append(Triple(h, relations.add(relation), t))
            encoded.append(split)
        return cls(entities, relations, *encoded)

    @property
    def entities(self) -> Vocab:
        """The entity vocabulary."""
        return self._entities

    @property
    def relations(self) -> Vocab:
        """The relation vocabulary."""
        return self._relations

    @property
    def num_entities(self) -> int:
        """|E|."""
        return len(self._entities)

    @property
    def num_relations(self) -> int:
        """|R|."""
        return len(self._relations)

    @property
    def train(self) -> tuple[Triple, ...]:
        """The train split in file order."""
        return self._splits[Split.TRAIN]

    @property
    def valid(self) -> tuple[Triple, ...]:
        """The valid split in file order."""
        return self._splits[Split.VALID]

    @property
    def test(self) -> tuple[Triple, ...]:
        """The test split in file order."""
        return self._splits[Split.TEST]

    def split(self, split: Split | str) -> tuple[Triple, ...]:
        """The triples of a split; ``ALL`` concatenates the three in order."""
        split = Split.get_best(split)
        if split is Split.ALL:
            return self.train + self.valid + self.test
        return self._splits[split]

    def index(self, split: Split | str = Split.ALL) -> frozenset[Triple]:
        """The membership set of a split (the union for ``ALL``)."""
        return self._index[Split.get_best(split)]

    def contains(self, triple: Triple | tuple[int, int, int], split: Split | str = Split.ALL) -> bool:
        """Answer ``triple in split`` in O(1) expected time."""
        return Triple(*triple) in self._index[Split.get_best(split)]

    def _encode(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, 3)
        return (rows[:, 0] * self.num_relations + rows[:, 1]) * self.num_entities + rows[:, 2]

    @functools.cached_property
    def _keys(self) -> dict[Split, np.ndarray]:
        found = {split: np.sort(self._encode(self.as_array(split))) for split in Split.concrete()}
        found[Split.ALL] = np.unique(np.concatenate(list(found.values())))
        return found

    def contains_rows(self, rows: np.ndarray, split: Split | str = Split.ALL) -> np.ndarray:
        """Vectorized ``contains`` over ``(n, 3)`` id rows, as a boolean mask."""
        return np.isin(self._encode(rows), self._keys[Split.get_best(split)])

    def check_index(self) -> bool:
        """Rebuild the membership sets and compare them with the stored ones."""
        rebuilt = {split: frozenset(self._splits[split]) for split in Split.concrete()}
        union = rebuilt[Split.TRAIN] | rebuilt[Split.VALID] | rebuilt[Split.TEST]
        return all(rebuilt[split] == self._index[split] for split in rebuilt) and union == self._index[Split.ALL]

    def as_array(self, split: Split | str) -> np.ndarray:
        """A split as an ``(n, 3)`` int64 array of ``head, relation, tail``."""
        return _as_array(self.split(split))

    def check_relation(self, relation: int) -> int:
        """Validate a relation id.

        Raises:
            UnknownRelationError: If the id is not in the vocabulary
        """
        if not 0 <= int(relation) < self.num_relations:
            msg = f"unknown relation id {relation} (|R|={self.num_relations})"
            raise UnknownRelationError(msg)
        return int(relation)

    def check_entity(self, entity: int) -> int:
        """Validate an entity id.

        Raises:
            UnknownEntityError: If the id is not in the vocabulary
        """
        if not 0 <= int(entity) < self.num_entities:
            msg = f"unknown entity id {entity} (|E|={self.num_entities})"
            raise UnknownEntityError(msg)
        return int(entity)

    def relation_id(self, name: str) -> int:
        """Resolve a relation name.

        Raises:
            UnknownRelationError: If the name is unknown
        """
        try:
            return self._relations.id_of(name)
        except KeyError:
            msg = f"unknown relation {name!r}"
            raise UnknownRelationError(msg) from None

    def names_of(self, triple: Triple) -> tuple[str, str, str]:
        """The names of a triple."""
        return (
            self._entities.name_of(triple.head),
            self._relations.name_of(triple.relation),
            self._entities.name_of(triple.tail),
        )

    def with_splits(
        self,
        train: Sequence[Triple] | None = None,
        valid: Sequence[Triple] | None = None,
        test: Sequence[Triple] | None = None,
    ) -> TripleStore:
        """A new store sharing the vocabularies, with some splits replaced."""
        return TripleStore(
            self._entities,
            self._relations,
            self.train if train is None else train,
            self.valid if valid is None else valid,
            self.test if test is None else test,
        )

    @functools.cached_property
    def _known_tails(self) -> dict[tuple[int, int], frozenset[int]]:
        grouped: dict[tuple[int, int], set[int]] = defaultdict(set)
        for head, relation, tail in self._index[Split.ALL]:
            grouped[head, relation].add(tail)
        return {key: frozenset(value) for key, value in grouped.items()}

    @functools.cached_property
    def _known_heads(self) -> dict[tuple[int, int], frozenset[int]]:
        grouped: dict[tuple[int, int], set[int]] = defaultdict(set)
        for head, relation, tail in self._index[Split.ALL]:
            grouped[relation, tail].add(head)
        return {key: frozenset(value) for key, value in grouped.items()}

    def known_tails(self, head: int, relation: int) -> frozenset[int]:
        """Tails ``t`` with ``(head, relation, t)`` in any split."""
        return self._known_tails.get((head, relation), frozenset())

    def known_heads(self, relation: int, tail: int) -> frozenset[int]:
        """Heads ``h`` with ``(h, relation, tail)`` in any split."""
        return self._known_heads.get((relation, tail), frozenset())

    def name_level_splits(self) -> dict[Split, tuple[tuple[str, str, str], ...]]:
        """Every split spelled out with names, independent of id assignment."""
        return {split: tuple(self.names_of(triple) for triple in self._splits[split]) for split in Split.concrete()}

    def __len__(self) -> int:
        return sum(len(self._splits[split]) for split in Split.concrete())

    def __repr__(self) -> str:
        sizes = "/".join(str(len(self._splits[split])) for split in Split.concrete())
        return f"{type(self).__name__}(|E|={self.num_entities}, |R|={self.num_relations}, train/valid/test={sizes})"


def _as_array(triples: Sequence[Triple]) -> np.ndarray:
    if not triples:
        return np.empty((0, 3), dtype=np.int64)
    return np.asarray(triples, dtype=np.int64).reshape(-1, 3)
