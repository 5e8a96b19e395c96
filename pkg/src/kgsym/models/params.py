"""Parameter storage, initialization and constraints."""

from __future__ import annotations

import logging
import math

from collections.abc import Collection
from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import ConstraintError
from ..kg_constants import ModelKind


logger = logging.getLogger(__name__)

#: Parameter blocks in checkpoint order
BLOCK_ORDER = ("entity_emb", "entity_proj", "rel_vec", "rel_hyper", "rel_proj")

#: How far a float32 unit row may miss length 1 (float64 rows meet 1e-9)
FLOAT32_UNIT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RelationSlot:
    """One relation vector with its model specific companions."""

    #: The translation ``r``
    r_vec: np.ndarray
    #: The hyperplane normal, TransH only
    hyperplane: np.ndarray | None = None
    #: The relation projection vector, TransD only
    rel_proj: np.ndarray | None = None


class SingleRelation(NamedTuple):
    """A relation held by one slot."""

    slot: int


class PairRelation(NamedTuple):
    """A symmetric relation held by two independent slots."""

    plus: int
    minus: int


class ModelParams:
    """Entity and relation parameters of one model.

    Relation parameters live in slot arrays. Slot ``r`` holds relation ``r``
    (its ``plus`` vector when it is a pair); the ``minus`` vectors of paired
    relations follow after the last relation, in relation id order.
    """

    def __init__(
        self,
        model_kind: ModelKind | str,
        entity_emb: np.ndarray,
        rel_vec: np.ndarray,
        minus_slot: np.ndarray,
        entity_proj: np.ndarray | None = None,
        rel_hyper: np.ndarray | None = None,
        rel_proj: np.ndarray | None = None,
    ) -> None:
        """Initialize from existing arrays.

        Args:
            model_kind: TransE, TransH or TransD
            entity_emb: ``(|E|, d)`` entity embeddings
            rel_vec: ``(slots, d)`` relation translations
            minus_slot: ``(|R|,)`` slot of each relation's minus vector, -1 for singles
            entity_proj: ``(|E|, d)`` entity projection vectors, TransD only
            rel_hyper: ``(slots, d)`` hyperplane normals, TransH only
            rel_proj: ``(slots, d)`` relation projection vectors, TransD only
        """
        self.model_kind = ModelKind.get_best(model_kind)
        self.entity_emb = entity_emb
        self.entity_proj = entity_proj
        self.rel_vec = rel_vec
        self.rel_hyper = rel_hyper
        self.rel_proj = rel_proj
        self.minus_slot = np.asarray(minus_slot, dtype=np.int64)
        self._validate()

    def _validate(self) -> None:
        kind = self.model_kind
        if self.entity_emb.ndim != 2 or self.rel_vec.ndim != 2:
            msg = "entity and relation tables must be 2-d"
            raise ConstraintError(msg)
        dim = self.entity_emb.shape[1]
        for name, block in self.blocks().items():
            if block.shape[1] != dim:
                msg = f"{name} has dimension {block.shape[1]}, expected {dim}"
                raise ConstraintError(msg)
        if (self.entity_proj is not None) != (kind is ModelKind.TRANSD):
            msg = "entity projections exist exactly for TransD"
            raise ConstraintError(msg)
        if (self.rel_proj is not None) != (kind is ModelKind.TRANSD):
            msg = "relation projections exist exactly for TransD"
            raise ConstraintError(msg)
        if (self.rel_hyper is not None) != (kind is ModelKind.TRANSH):
            msg = "hyperplane normals exist exactly for TransH"
            raise ConstraintError(msg)
        pairs = int((self.minus_slot >= 0).sum())
        if self.rel_vec.shape[0] != self.num_relations + pairs:
            msg = f"expected {self.num_relations + pairs} relation slots, found {self.rel_vec.shape[0]}"
            raise ConstraintError(msg)

    @property
    def dim(self) -> int:
        """The embedding dimension d."""
        return int(self.entity_emb.shape[1])

    @property
    def dtype(self) -> np.dtype:
        """The floating point type of every block."""
        return self.entity_emb.dtype

    @property
    def num_entities(self) -> int:
        """|E|."""
        return int(self.entity_emb.shape[0])

    @property
    def num_relations(self) -> int:
        """|R|."""
        return int(self.minus_slot.shape[0])

    @property
    def num_slots(self) -> int:
        """Relation slots, |R| plus one per pair."""
        return int(self.rel_vec.shape[0])

    @property
    def symmetric_relations(self) -> frozenset[int]:
        """Relations held as pairs."""
        return frozenset(int(r) for r in np.flatnonzero(self.minus_slot >= 0))

    def relation_param(self, relation: int) -> SingleRelation | PairRelation:
        """How a relation is represented."""
        minus = int(self.minus_slot[relation])
        if minus < 0:
            return SingleRelation(int(relation))
        return PairRelation(int(relation), minus)

    def slot(self, index: int) -> RelationSlot:
        """Views on the vectors of one slot."""
        return RelationSlot(
            r_vec=self.rel_vec[index],
            hyperplane=None if self.rel_hyper is None else self.rel_hyper[index],
            rel_proj=None if self.rel_proj is None else self.rel_proj[index],
        )

    def blocks(self) -> dict[str, np.ndarray]:
        """The present parameter blocks in checkpoint order."""
        found = {name: getattr(self, name) for name in BLOCK_ORDER}
        return {name: block for name, block in found.items() if block is not None}

    def copy(self) -> ModelParams:
        """A deep copy."""
        return ModelParams(
            self.model_kind,
            self.entity_emb.copy(),
            self.rel_vec.copy(),
            self.minus_slot.copy(),
            entity_proj=None if self.entity_proj is None else self.entity_proj.copy(),
            rel_hyper=None if self.rel_hyper is None else self.rel_hyper.copy(),
            rel_proj=None if self.rel_proj is None else self.rel_proj.copy(),
        )

    def astype(self, dtype: np.dtype | type) -> ModelParams:
        """A copy with every block cast to ``dtype``."""
        cast = {name: block.astype(dtype) for name, block in self.blocks().items()}
        return ModelParams(self.model_kind, minus_slot=self.minus_slot.copy(), **cast)

    def equals(self, other: ModelParams) -> bool:
        """Bitwise equality of structure and every block."""
        if self.model_kind is not other.model_kind or not np.array_equal(self.minus_slot, other.minus_slot):
            return False
        mine, theirs = self.blocks(), other.blocks()
        return mine.keys() == theirs.keys() and all(
            mine[name].dtype == theirs[name].dtype and mine[name].tobytes() == theirs[name].tobytes()
            for name in mine
        )

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}({self.model_kind.display}, d={self.dim}, |E|={self.num_entities}, "
            f"|R|={self.num_relations}, pairs={len(self.symmetric_relations)})"
        )


def init_params(
    num_entities: int,
    num_relations: int,
    symmetric: Collection[int],
    model_kind: ModelKind | str,
    dim: int,
    seed: int,
    dtype: np.dtype | type = np.float32,
) -> ModelParams:
    """Draw fresh parameters.

    Every component is uniform on ``[-6/sqrt(d), 6/sqrt(d)]``; entity
    embeddings and TransH normals are then scaled to unit length. The minus
    vectors of pairs are drawn independently of their plus vectors.

    Args:
        num_entities: |E|
        num_relations: |R|
        symmetric: Relation ids to hold as pairs
        model_kind: TransE, TransH or TransD
        dim: Embedding dimension
        seed: Generator seed, the result is a pure function of the arguments
        dtype: Floating point type of the blocks

    Returns:
        The parameters

    Raises:
        ConstraintError: For ``dim < 1``, no entities or no relations
    """
    kind = ModelKind.get_best(model_kind)
    if dim < 1:
        msg = f"dimension must be at least 1, got {dim}"
        raise ConstraintError(msg)
    if num_entities < 1 or num_relations < 1:
        msg = f"need at least one entity and one relation, got |E|={num_entities}, |R|={num_relations}"
        raise ConstraintError(msg)
    pairs = sorted({int(r) for r in symmetric})
    if pairs and not 0 <= pairs[0] <= pairs[-1] < num_relations:
        msg = f"symmetric relation ids must lie below {num_relations}"
        raise ConstraintError(msg)

    minus_slot = np.full(num_relations, -1, dtype=np.int64)
    minus_slot[pairs] = np.arange(num_relations, num_relations + len(pairs))
    slots = num_relations + len(pairs)

    rng = np.random.default_rng(seed)
    bound = 6.0 / math.sqrt(dim)

    def draw(rows: int) -> np.ndarray:
        return rng.uniform(-bound, bound, size=(rows, dim))

    entity_emb = _unit_rows(draw(num_entities))
    entity_proj = draw(num_entities) if kind is ModelKind.TRANSD else None
    rel_vec = draw(slots)
    rel_hyper = _unit_rows(draw(slots)) if kind is ModelKind.TRANSH else None
    rel_proj = draw(slots) if kind is ModelKind.TRANSD else None

    def cast(block: np.ndarray | None) -> np.ndarray | None:
        return None if block is None else block.astype(dtype)

    params = ModelParams(
        kind,
        cast(entity_emb),
        cast(rel_vec),
        minus_slot,
        entity_proj=cast(entity_proj),
        rel_hyper=cast(rel_hyper),
        rel_proj=cast(rel_proj),
    )
    logger.debug("initialized %r with seed %d", params, seed)
    return params


def _unit_rows(block: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(block, axis=1, keepdims=True)
    if np.any(norms == 0):
        msg = "cannot normalize a zero vector"
        raise ConstraintError(msg)
    return block / norms


def _selection(indices: Iterable[int] | np.ndarray | None) -> slice | np.ndarray:
    if indices is None:
        return slice(None)
    return np.unique(np.asarray(list(indices), dtype=np.int64))


def apply_constraints(
    params: ModelParams,
    entities: Iterable[int] | np.ndarray | None = None,
    slots: Iterable[int] | np.ndarray | None = None,
) -> None:
    """Project entities into the unit ball and renormalize TransH normals.

    Entity rows are only scaled when their norm exceeds 1; relation vectors
    are left alone.

    Args:
        params: Parameters, modified in place
        entities: Restrict to these entity rows, all rows by default
        slots: Restrict to these relation slots, all slots by default

    Raises:
        ConstraintError: If a TransH normal is the zero vector
    """
    rows = _selection(entities)
    emb = params.entity_emb[rows]
    norms = np.linalg.norm(emb, axis=1)
    over = norms > 1.0
    if np.any(over):
        emb[over] /= norms[over, None]
        params.entity_emb[rows] = emb

    if params.rel_hyper is not None:
        picked = _selection(slots)
        normals = params.rel_hyper[picked]
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(lengths == 0):
            msg = "zero hyperplane normal cannot be normalized"
            raise ConstraintError(msg)
        params.rel_hyper[picked] = normals / lengths[:, None]


def relation_norms(params: ModelParams, relations: Iterable[int]) -> dict[int, dict[str, float]]:
    """L2 norms of relation vectors for the degeneration trace.

    Returns:
        For singles ``{"norm": ...}``, for pairs ``{"plus", "minus", "gap"}``
        where gap is the norm of the difference of the two vectors
    """
    found: dict[int, dict[str, float]] = {}
    for relation in relations:
        param = params.relation_param(relation)
        if isinstance(param, PairRelation):
            plus = params.rel_vec[param.plus].astype(np.float64)
            minus = params.rel_vec[param.minus].astype(np.float64)
            found[relation] = {
                "plus": float(np.linalg.norm(plus)),
                "minus": float(np.linalg.norm(minus)),
                "gap": float(np.linalg.norm(plus - minus)),
            }
        else:
            found[relation] = {"norm": float(np.linalg.norm(params.rel_vec[param.slot].astype(np.float64)))}
    return found


def mean_entity_norm(params: ModelParams) -> float:
    """Mean L2 norm of the entity embeddings."""
    return float(np.linalg.norm(params.entity_emb.astype(np.float64), axis=1).mean())
