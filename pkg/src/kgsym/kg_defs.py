"""Commonly used record types."""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field
from typing import TYPE_CHECKING
from typing import Any
from typing import NamedTuple


if TYPE_CHECKING:
    from .kg_constants import Split
    from .kg_data.store import TripleStore


class Triple(NamedTuple):
    """One integer encoded fact.

    Args:
        head: The head entity id
        relation: The relation id
        tail: The tail entity id
    """

    head: int
    relation: int
    tail: int

    def reverse(self) -> Triple:
        """The same fact read in the other direction."""
        return Triple(self.tail, self.relation, self.head)

    @property
    def is_reflexive(self) -> bool:
        """Head and tail are the same entity."""
        return self.head == self.tail


@dataclass(frozen=True)
class RelationMeta:
    """Symmetry statistics of one relation."""

    #: The relation id
    relation: int
    #: The relation name
    name: str
    #: Triples using the relation in the analysed split
    total: int
    #: Triples whose reverse is present in the same split
    symmetric_count: int
    #: ``symmetric_count / total``, 0 for an empty relation
    ratio: float
    #: ``ratio >= threshold``
    is_symmetric: bool

    def to_dict(self) -> dict[str, Any]:
        """Stable JSON representation."""
        return {
            "relation": self.relation,
            "name": self.name,
            "total": self.total,
            "symmetric": self.symmetric_count,
            "ratio": self.ratio,
            "is_symmetric": self.is_symmetric,
        }


@dataclass(frozen=True)
class SplitStats:
    """Raw counts for one split, percentages are derived from them."""

    #: ALL, the triples in the split
    total: int
    #: SYM, triples whose reverse is in the same split
    symmetric: int
    #: Reverses added by guarded completion
    added: int
    #: Reverses guarded completion refused because they live in another split
    skipped: int
    #: Reverses added when completing without the leakage guard
    added_unguarded: int

    @staticmethod
    def _percent(numerator: int, denominator: int) -> float:
        return 100.0 * numerator / denominator if denominator else 0.0

    @property
    def percent_before(self) -> float:
        """SYM/ALL in percent."""
        return self._percent(self.symmetric, self.total)

    @property
    def percent_after(self) -> float:
        """(SYM + 2 added) / (ALL + added) in percent, guarded completion."""
        return self._percent(self.symmetric + 2 * self.added, self.total + self.added)

    @property
    def percent_after_unguarded(self) -> float:
        """As ``percent_after`` but for completion without the leakage guard."""
        return self._percent(
            self.symmetric + 2 * self.added_unguarded,
            self.total + self.added_unguarded,
        )

    def to_dict(self) -> dict[str, Any]:
        """Stable JSON representation."""
        return {
            "all": self.total,
            "sym": self.symmetric,
            "added": self.added,
            "skipped_leakage": self.skipped,
            "added_unguarded": self.added_unguarded,
            "percent_before": round(self.percent_before, 4),
            "percent_after": round(self.percent_after, 4),
            "percent_after_unguarded": round(self.percent_after_unguarded, 4),
        }


@dataclass(frozen=True)
class StatsReport:
    """Dataset statistics with the per relation symmetry table."""

    entity_count: int
    relation_count: int
    threshold: float
    #: The split the symmetry ratios were computed over
    basis: Split
    splits: dict[Split, SplitStats]
    #: Rows sorted by ratio, descending
    relations: tuple[RelationMeta, ...] = field(default_factory=tuple)

    @property
    def symmetric_relations(self) -> tuple[RelationMeta, ...]:
        """Rows classified symmetric."""
        return tuple(meta for meta in self.relations if meta.is_symmetric)

    def to_dict(self) -> dict[str, Any]:
        """Stable JSON representation, keys documented in docs/REPORTS.md."""
        return {
            "entities": self.entity_count,
            "relations": self.relation_count,
            "threshold": self.threshold,
            "basis": str(self.basis),
            "splits": {str(split): stats.to_dict() for split, stats in self.splits.items()},
            "relation_table": [meta.to_dict() for meta in self.relations],
        }


class Completion(NamedTuple):
    """The result of symmetric completion.

    Args:
        store: The completed store
        added: Reverses appended, per split
        skipped: Reverses refused by the leakage guard, per split
    """

    store: TripleStore
    added: dict[Split, int]
    skipped: dict[Split, int]

    @property
    def total_added(self) -> int:
        """Reverses appended over all splits."""
        return sum(self.added.values())
