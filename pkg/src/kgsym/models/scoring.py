"""Score functions of TransE, TransH, TransD and their paired variants.

Lower scores are more plausible. For a paired relation both vectors are
scored and the smaller value wins, ties go to the plus vector.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import ConstraintError
from ..kg_constants import DEFAULT_NORMS
from ..kg_constants import Branch
from ..kg_constants import ModelKind
from ..kg_constants import Norm
from ..kg_constants import Side
from ..kg_defs import Triple
from .params import ModelParams
from .params import RelationSlot


#: Branch codes used in vectorised results
SINGLE, PLUS, MINUS = 0, 1, 2
BRANCHES = (Branch.SINGLE, Branch.PLUS, Branch.MINUS)


class ScoreResult(NamedTuple):
    """A triple's score and the relation vector that produced it."""

    value: float
    branch: Branch


class BatchScores(NamedTuple):
    """Vectorised scores.

    Args:
        values: ``(B,)`` scores
        branches: ``(B,)`` branch codes, see ``BRANCHES``
        slots: ``(B,)`` the relation slot that produced each score
    """

    values: np.ndarray
    branches: np.ndarray
    slots: np.ndarray


def resolve_norm(params: ModelParams, norm: Norm | str | None) -> Norm:
    """The requested norm or the model's default."""
    return DEFAULT_NORMS[params.model_kind] if norm is None else Norm.get_best(norm)


def lp_norm(diff: np.ndarray, norm: Norm) -> np.ndarray:
    """Row norms of the last axis."""
    if norm is Norm.L1:
        return np.abs(diff).sum(axis=-1)
    return np.sqrt((diff * diff).sum(axis=-1))


def _check_dims(*vectors: np.ndarray | None) -> None:
    shapes = {np.shape(vector) for vector in vectors if vector is not None}
    if len(shapes) != 1:
        msg = f"dimension mismatch between vectors of shapes {sorted(shapes)}"
        raise ConstraintError(msg)


def score_transe(h: np.ndarray, slot: RelationSlot, t: np.ndarray, norm: Norm | str = Norm.L1) -> float:
    """``||h + r - t||``."""
    _check_dims(h, slot.r_vec, t)
    return float(lp_norm(np.asarray(h) + slot.r_vec - np.asarray(t), Norm.get_best(norm)))


def score_transh(h: np.ndarray, slot: RelationSlot, t: np.ndarray, norm: Norm | str = Norm.L2) -> float:
    """``||h_perp + r - t_perp||`` with ``x_perp = x - (w.x) w``."""
    w = slot.hyperplane
    if w is None:
        msg = "TransH scoring needs a hyperplane normal"
        raise ConstraintError(msg)
    _check_dims(h, slot.r_vec, t, w)
    assert abs(float(np.linalg.norm(w)) - 1.0) < 1e-6, "hyperplane normal must have unit length"  # noqa: S101
    h_perp = h - np.dot(w, h) * w
    t_perp = t - np.dot(w, t) * w
    return float(lp_norm(h_perp + slot.r_vec - t_perp, Norm.get_best(norm)))


def score_transd(
    h: np.ndarray,
    h_proj: np.ndarray,
    slot: RelationSlot,
    t: np.ndarray,
    t_proj: np.ndarray,
    norm: Norm | str = Norm.L2,
) -> float:
    """``||M_h h + r - M_t t||`` with ``M_x = r_p x_p^T + I``, never materialised."""
    r_p = slot.rel_proj
    if r_p is None:
        msg = "TransD scoring needs a relation projection vector"
        raise ConstraintError(msg)
    _check_dims(h, h_proj, slot.r_vec, t, t_proj, r_p)
    h_perp = h + np.dot(h_proj, h) * r_p
    t_perp = t + np.dot(t_proj, t) * r_p
    return float(lp_norm(h_perp + slot.r_vec - t_perp, Norm.get_best(norm)))


def differences(params: ModelParams, heads: np.ndarray, slots: np.ndarray, tails: np.ndarray) -> np.ndarray:
    """``h_perp + r - t_perp`` for a batch, shape ``(B, d)``."""
    h = params.entity_emb[heads]
    t = params.entity_emb[tails]
    r = params.rel_vec[slots]
    kind = params.model_kind
    if kind is ModelKind.TRANSE:
        return h + r - t
    if kind is ModelKind.TRANSH:
        w = params.rel_hyper[slots]
        u = h - t
        return u - (u * w).sum(axis=1, keepdims=True) * w + r
    r_p = params.rel_proj[slots]
    h_shift = (params.entity_proj[heads] * h).sum(axis=1, keepdims=True)
    t_shift = (params.entity_proj[tails] * t).sum(axis=1, keepdims=True)
    return h + r - t + (h_shift - t_shift) * r_p


def score_batch(params: ModelParams, triples: np.ndarray, norm: Norm | str | None = None) -> BatchScores:
    """Scores of a ``(B, 3)`` array of ``head, relation, tail`` ids."""
    norm = resolve_norm(params, norm)
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    heads, relations, tails = triples[:, 0], triples[:, 1], triples[:, 2]
    values = lp_norm(differences(params, heads, relations, tails), norm)
    slots = relations.copy()
    minus = params.minus_slot[relations]
    paired = minus >= 0
    branches = np.where(paired, PLUS, SINGLE)
    if np.any(paired):
        pick = np.flatnonzero(paired)
        minus_values = lp_norm(differences(params, heads[pick], minus[pick], tails[pick]), norm)
        better = minus_values < values[pick]
        chosen = pick[better]
        values[chosen] = minus_values[better]
        slots[chosen] = minus[chosen]
        branches[chosen] = MINUS
    return BatchScores(values, branches, slots)


def score(params: ModelParams, triple: Triple | tuple[int, int, int], norm: Norm | str | None = None) -> ScoreResult:
    """Score one triple, taking the better vector of a pair.

    Args:
        params: The model
        triple: ``(head, relation, tail)`` ids
        norm: L1 or L2, the model default when omitted

    Returns:
        The score and the branch that produced it
    """
    triple = Triple(*triple)
    if not (0 <= triple.head < params.num_entities and 0 <= triple.tail < params.num_entities):
        msg = f"entity id out of range in {tuple(triple)}"
        raise ConstraintError(msg)
    if not 0 <= triple.relation < params.num_relations:
        msg = f"relation id out of range in {tuple(triple)}"
        raise ConstraintError(msg)
    result = score_batch(params, np.asarray([triple]), norm)
    return ScoreResult(float(result.values[0]), BRANCHES[int(result.branches[0])])


def _candidate_scores(params: ModelParams, anchor: int, slot: int, side: Side, norm: Norm) -> np.ndarray:
    """Scores of every entity placed at ``side`` with ``anchor`` at the other end."""
    emb = params.entity_emb
    r = params.rel_vec[slot]
    kind = params.model_kind
    if kind is ModelKind.TRANSE:
        fixed = emb[anchor]
        moving = emb
    elif kind is ModelKind.TRANSH:
        w = params.rel_hyper[slot]
        fixed = emb[anchor] - np.dot(w, emb[anchor]) * w
        moving = emb - (emb @ w)[:, None] * w
    else:
        r_p = params.rel_proj[slot]
        fixed = emb[anchor] + np.dot(params.entity_proj[anchor], emb[anchor]) * r_p
        moving = emb + (params.entity_proj * emb).sum(axis=1)[:, None] * r_p
    if side is Side.TAIL:
        return lp_norm((fixed + r)[None, :] - moving, norm)
    return lp_norm(moving + (r - fixed)[None, :], norm)


def score_candidates(
    params: ModelParams,
    anchor: int,
    relation: int,
    side: Side | str,
    norm: Norm | str | None = None,
) -> np.ndarray:
    """Scores of every entity substituted at one end of a triple.

    Args:
        params: The model
        anchor: The entity kept at the other end
        relation: The relation id
        side: ``tail`` scores ``(anchor, r, e)``, ``head`` scores ``(e, r, anchor)``
        norm: L1 or L2, the model default when omitted

    Returns:
        ``(|E|,)`` scores, the minimum over both vectors for a pair
    """
    norm = resolve_norm(params, norm)
    side = Side.get_best(side)
    scores = _candidate_scores(params, anchor, relation, side, norm)
    minus = int(params.minus_slot[relation])
    if minus >= 0:
        scores = np.minimum(scores, _candidate_scores(params, anchor, minus, side, norm))
    return scores
