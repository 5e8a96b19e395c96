"""Closed-form gradients of the margin ranking loss.

For a positive triple and its corruption the loss is
``max(0, margin + f(pos) - f(neg))``. Only the relation vector selected by
the min over a pair receives gradient. The L1 subgradient is ``sign`` with
``sign(0) = 0``, the L2 gradient at the zero difference is 0.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from dataclasses import field
from typing import NamedTuple

import numpy as np

from ..errors import ConstraintError
from ..kg_constants import ModelKind
from ..kg_constants import Norm
from ..kg_defs import Triple
from .params import ModelParams
from .scoring import differences
from .scoring import resolve_norm
from .scoring import score_batch


class RowGradients(NamedTuple):
    """Gradient rows for one parameter block, indices may repeat."""

    block: str
    indices: np.ndarray
    values: np.ndarray


@dataclass
class BatchGradients:
    """Losses and sparse gradients of a batch of (positive, negative) pairs."""

    #: ``(B,)`` hinge losses
    losses: np.ndarray
    #: Gradient contributions, summed when applied
    rows: list[RowGradients] = field(default_factory=list)

    @property
    def loss(self) -> float:
        """Summed hinge loss."""
        return float(self.losses.sum())

    @property
    def active(self) -> int:
        """Pairs with a positive hinge."""
        return int((self.losses > 0).sum())

    def touched(self, block: str) -> np.ndarray:
        """Unique row indices of a block receiving gradient."""
        found = [row.indices for row in self.rows if row.block == block]
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(found))

    def dense(self, params: ModelParams) -> dict[str, np.ndarray]:
        """Accumulated gradients as full size arrays (for checks and tests)."""
        blocks = params.blocks()
        out = {name: np.zeros(block.shape, dtype=np.float64) for name, block in blocks.items()}
        for row in self.rows:
            np.add.at(out[row.block], row.indices, row.values)
        return out

    @classmethod
    def merge(cls, parts: list[BatchGradients]) -> BatchGradients:
        """Concatenate shards in order."""
        losses = np.concatenate([part.losses for part in parts]) if parts else np.empty(0)
        return cls(losses, [row for part in parts for row in part.rows])


class Gradients(NamedTuple):
    """Gradient of one (positive, negative) pair.

    Args:
        loss: The hinge loss
        blocks: ``{block: {row: gradient}}`` for exactly the touched rows,
            empty when the hinge is inactive
    """

    loss: float
    blocks: dict[str, dict[int, np.ndarray]]


def _norm_gradient(diff: np.ndarray, norm: Norm) -> np.ndarray:
    if norm is Norm.L1:
        return np.sign(diff)
    length = np.sqrt((diff * diff).sum(axis=1, keepdims=True))
    safe = np.where(length > 0, length, 1.0)
    return np.where(length > 0, diff / safe, 0.0)


def _backward(
    params: ModelParams,
    heads: np.ndarray,
    slots: np.ndarray,
    tails: np.ndarray,
    upstream: np.ndarray,
) -> list[RowGradients]:
    """Push ``d loss / d diff`` rows back to the parameters that built ``diff``."""
    g = upstream
    kind = params.model_kind
    if kind is ModelKind.TRANSE:
        return [
            RowGradients("entity_emb", heads, g),
            RowGradients("entity_emb", tails, -g),
            RowGradients("rel_vec", slots, g),
        ]
    h = params.entity_emb[heads]
    t = params.entity_emb[tails]
    if kind is ModelKind.TRANSH:
        w = params.rel_hyper[slots]
        u = h - t
        wg = (w * g).sum(axis=1, keepdims=True)
        wu = (w * u).sum(axis=1, keepdims=True)
        g_u = g - wg * w
        return [
            RowGradients("entity_emb", heads, g_u),
            RowGradients("entity_emb", tails, -g_u),
            RowGradients("rel_vec", slots, g),
            RowGradients("rel_hyper", slots, -(wg * u + wu * g)),
        ]
    r_p = params.rel_proj[slots]
    h_p = params.entity_proj[heads]
    t_p = params.entity_proj[tails]
    rg = (r_p * g).sum(axis=1, keepdims=True)
    h_shift = (h_p * h).sum(axis=1, keepdims=True)
    t_shift = (t_p * t).sum(axis=1, keepdims=True)
    return [
        RowGradients("entity_emb", heads, g + rg * h_p),
        RowGradients("entity_emb", tails, -(g + rg * t_p)),
        RowGradients("entity_proj", heads, rg * h),
        RowGradients("entity_proj", tails, -rg * t),
        RowGradients("rel_vec", slots, g),
        RowGradients("rel_proj", slots, (h_shift - t_shift) * g),
    ]


def batch_gradients(
    params: ModelParams,
    positives: np.ndarray,
    negatives: np.ndarray,
    margin: float,
    norm: Norm | str | None = None,
) -> BatchGradients:
    """Hinge losses and gradients for aligned positive and negative triples.

    Args:
        params: The model
        positives: ``(B, 3)`` positive ``head, relation, tail`` ids
        negatives: ``(B, 3)`` corruptions sharing each positive's relation
        margin: The margin, positive
        norm: L1 or L2, the model default when omitted

    Returns:
        Per pair losses and the gradient rows of the active pairs

    Raises:
        ConstraintError: On a non-positive margin or mismatched relations
    """
    if margin <= 0:
        msg = f"margin must be positive, got {margin}"
        raise ConstraintError(msg)
    norm = resolve_norm(params, norm)
    positives = np.asarray(positives, dtype=np.int64).reshape(-1, 3)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(-1, 3)
    if positives.shape != negatives.shape or not np.array_equal(positives[:, 1], negatives[:, 1]):
        msg = "positive and negative triples must pair up on the same relation"
        raise ConstraintError(msg)

    pos = score_batch(params, positives, norm)
    neg = score_batch(params, negatives, norm)
    losses = np.maximum(0.0, margin + pos.values - neg.values)
    active = np.flatnonzero(losses > 0)
    result = BatchGradients(losses)
    if active.size == 0:
        return result

    for triples, scored, sign in ((positives, pos, 1.0), (negatives, neg, -1.0)):
        heads = triples[active, 0]
        tails = triples[active, 2]
        slots = scored.slots[active]
        diff = differences(params, heads, slots, tails)
        upstream = sign * _norm_gradient(diff, norm)
        result.rows.extend(_backward(params, heads, slots, tails, upstream))
    return result


def gradients(
    params: ModelParams,
    pos: Triple | tuple[int, int, int],
    neg: Triple | tuple[int, int, int],
    margin: float,
    norm: Norm | str | None = None,
) -> Gradients:
    """Loss and gradient of one (positive, negative) pair.

    Args:
        params: The model
        pos: The positive triple
        neg: Its corruption, same relation
        margin: The margin, positive
        norm: L1 or L2, the model default when omitted

    Returns:
        The loss and the touched rows' gradients, empty when the loss is 0
    """
    batch = batch_gradients(params, np.asarray([pos]), np.asarray([neg]), margin, norm)
    blocks: dict[str, dict[int, np.ndarray]] = defaultdict(dict)
    for row in batch.rows:
        for index, value in zip(row.indices.tolist(), row.values):
            current = blocks[row.block].get(index)
            blocks[row.block][index] = value.copy() if current is None else current + value
    return Gradients(batch.loss, dict(blocks))


def apply_gradients(params: ModelParams, grads: BatchGradients, learning_rate: float) -> None:
    """SGD step ``theta <- theta - lr * grad`` on the touched rows, in place."""
    blocks = params.blocks()
    for row in grads.rows:
        block = blocks[row.block]
        np.add.at(block, row.indices, (-learning_rate * row.values).astype(block.dtype, copy=False))


def loss_value(
    params: ModelParams,
    positives: np.ndarray,
    negatives: np.ndarray,
    margin: float,
    norm: Norm | str | None = None,
) -> float:
    """Summed hinge loss without gradients."""
    norm = resolve_norm(params, norm)
    pos = score_batch(params, positives, norm).values
    neg = score_batch(params, negatives, norm).values
    return float(np.maximum(0.0, margin + pos - neg).sum())
